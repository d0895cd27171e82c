/** Scene-document helpers: hit tests, the residual overlay, local mirroring.
 *
 * The server owns layout (decal positions always come from `layout` frames);
 * the client only mirrors *geometry* edits it has sent and seen accepted, so
 * it can draw the display shape without a scene echo from the server.
 */
import type { DecalDoc, DeltaDoc, DisplayDoc, SceneDoc, Vec2 } from "./protocol.js";

/** Signed distance to a polygon outline: negative strictly inside. */
export function polygonDistance(vertices: Vec2[], p: Vec2): number {
  const [px, py] = p;
  let best = Infinity;
  let inside = false;
  for (let i = 0, j = vertices.length - 1; i < vertices.length; j = i++) {
    const [ax, ay] = vertices[j]!;
    const [bx, by] = vertices[i]!;
    const ex = bx - ax;
    const ey = by - ay;
    const len2 = ex * ex + ey * ey;
    const t = len2 > 0 ? Math.max(0, Math.min(1, ((px - ax) * ex + (py - ay) * ey) / len2)) : 0;
    const dx = px - (ax + t * ex);
    const dy = py - (ay + t * ey);
    best = Math.min(best, Math.hypot(dx, dy));
    // even-odd crossing test on edge (j -> i)
    if (ay > py !== by > py && px < ax + ((py - ay) / (by - ay)) * (bx - ax)) {
      inside = !inside;
    }
  }
  return inside ? -best : best;
}

/** Signed distance to the usable area: negative inside outer and outside holes. */
export function displayDistance(display: DisplayDoc, p: Vec2): number {
  let d = polygonDistance(display.outer, p);
  for (const hole of display.holes ?? []) {
    d = Math.max(d, -polygonDistance(hole, p));
  }
  return d;
}

export function decalPosition(scene: SceneDoc, positions: Record<string, Vec2>, id: string): Vec2 {
  const fromLayout = positions[id];
  if (fromLayout) return fromLayout;
  const decal = scene.decals.find((d) => d.id === id);
  return decal ? decal.pos : [0, 0];
}

/**
 * Residual magnitude used for the heat overlay: boundary-margin violation
 * plus pairwise overlap, both in px. Zero means the decal is fully inside
 * the usable area and clear of every other decal.
 */
export function decalResidual(
  scene: SceneDoc,
  positions: Record<string, Vec2>,
  id: string,
): number {
  const decal = scene.decals.find((d) => d.id === id);
  if (!decal) return 0;
  const pos = decalPosition(scene, positions, id);
  let out = Math.max(0, displayDistance(scene.display, pos) + decal.radius);
  for (const other of scene.decals) {
    if (other.id === id) continue;
    const q = decalPosition(scene, positions, other.id);
    const l1 = Math.abs(pos[0] - q[0]) + Math.abs(pos[1] - q[1]);
    out += Math.max(0, decal.radius + other.radius - l1);
  }
  return out;
}

// --- hit testing ---------------------------------------------------------------------------

export type Hit =
  | { type: "decal"; id: string }
  | { type: "vertex"; index: number }
  | { type: "hole"; index: number }
  | { type: "none" };

/** Topmost target under a world point: decals over vertices over holes. */
export function hitTest(
  scene: SceneDoc,
  positions: Record<string, Vec2>,
  world: Vec2,
  vertexTolerance: number,
): Hit {
  for (let i = scene.decals.length - 1; i >= 0; i--) {
    const decal = scene.decals[i]!;
    const [x, y] = decalPosition(scene, positions, decal.id);
    if (Math.hypot(world[0] - x, world[1] - y) <= decal.radius) {
      return { type: "decal", id: decal.id };
    }
  }
  let bestVertex = -1;
  let bestDist = vertexTolerance;
  scene.display.outer.forEach(([x, y], i) => {
    const d = Math.hypot(world[0] - x, world[1] - y);
    if (d <= bestDist) {
      bestDist = d;
      bestVertex = i;
    }
  });
  if (bestVertex >= 0) return { type: "vertex", index: bestVertex };
  const holes = scene.display.holes ?? [];
  for (let i = holes.length - 1; i >= 0; i--) {
    if (polygonDistance(holes[i]!, world) < 0) return { type: "hole", index: i };
  }
  return { type: "none" };
}

// --- local mirror of accepted edits --------------------------------------------------------

function translated(vertices: Vec2[], offset: Vec2): Vec2[] {
  return vertices.map(([x, y]) => [x + offset[0], y + offset[1]]);
}

/** Apply one accepted delta to the local scene mirror (geometry only). */
export function applySceneDelta(scene: SceneDoc, delta: DeltaDoc): SceneDoc {
  const holes = scene.display.holes ?? [];
  switch (delta.kind) {
    case "gamut_replaced":
      return { ...scene, display: delta.display };
    case "hole_added":
      return { ...scene, display: { ...scene.display, holes: [...holes, delta.polygon] } };
    case "hole_moved":
      return {
        ...scene,
        display: {
          ...scene.display,
          holes: holes.map((h, i) => (i === delta.hole ? translated(h, delta.offset) : h)),
        },
      };
    case "hole_removed":
      return {
        ...scene,
        display: { ...scene.display, holes: holes.filter((_, i) => i !== delta.hole) },
      };
    case "decal_added":
      return { ...scene, decals: [...scene.decals, delta.decal] };
    case "decal_removed":
      return {
        ...scene,
        decals: scene.decals.filter((d) => d.id !== delta.id),
        groups: scene.groups?.map((g) => ({
          ...g,
          members: g.members.filter((m) => m !== delta.id),
        })),
      };
    case "decal_pinned":
      return {
        ...scene,
        decals: scene.decals.map((d): DecalDoc => {
          if (d.id !== delta.id) return d;
          return { ...d, pos: delta.pos ?? d.pos };
        }),
      };
  }
}

export function sceneBounds(scene: SceneDoc): { min: Vec2; max: Vec2 } {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const [x, y] of scene.display.outer) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  return { min: [minX, minY], max: [maxX, maxY] };
}
