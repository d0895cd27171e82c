/** Canvas rendering of a scene + authoritative layout.
 *
 * Positions are never computed here: they come from the latest `layout`
 * frame (falling back to the scene's own coordinates before the first
 * solve). A frame older than the last one rendered is dropped.
 */
import type { Camera } from "./camera.js";
import type { DragGhost } from "./gestures.js";
import type { LayoutMessage, SceneDoc, Vec2 } from "./protocol.js";
import { decalPosition, decalResidual } from "./scene.js";

/** The 2D-context subset the renderer uses (a recorder implements it in tests). */
export interface Draw2D {
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  font: string;
  globalAlpha: number;
  save(): void;
  restore(): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(rule?: "evenodd" | "nonzero"): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export interface Overlays {
  residuals: boolean;
  anchors: boolean;
  rBoxes: boolean;
  costReadout: boolean;
}

export interface ViewState {
  camera: Camera;
  overlays: Overlays;
  selection: { type: "decal"; id: string } | { type: "hole"; index: number } | null;
  lastRenderedRevision: number;
}

export const DISPLAY_FILL = "#f4f1ea";
export const HOLE_FILL = "#c8c2b6";
export const NEUTRAL_FILL = "#6b9bd1";
export const PINNED_STROKE = "#1c2a3a";

/** Decal fill for a residual magnitude: neutral at 0, warming with violation. */
export function residualColor(magnitude: number): string {
  if (magnitude <= 0) return NEUTRAL_FILL;
  const t = Math.min(1, magnitude / 20);
  const channel = Math.round(120 - 90 * t);
  return `rgb(222, ${channel}, ${Math.round(70 - 40 * t)})`;
}

function tracePolygon(ctx: Draw2D, camera: Camera, vertices: Vec2[]): void {
  vertices.forEach((v, i) => {
    const [x, y] = camera.worldToScreen(v);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.closePath();
}

/**
 * Draw one frame; returns false (and draws nothing) when the layout frame
 * is older than what is already on screen.
 */
export function renderFrame(
  ctx: Draw2D,
  size: { width: number; height: number },
  scene: SceneDoc,
  layout: LayoutMessage | null,
  view: ViewState,
  ghost: DragGhost = { outline: null, decal: null },
): boolean {
  if (layout !== null && layout.revision < view.lastRenderedRevision) return false;
  if (layout !== null) view.lastRenderedRevision = layout.revision;
  const camera = view.camera;
  const positions = layout?.positions ?? {};

  ctx.clearRect(0, 0, size.width, size.height);

  // usable area: outer ring plus hole subpaths, punched out by even-odd fill
  const holes = scene.display.holes ?? [];
  ctx.beginPath();
  tracePolygon(ctx, camera, scene.display.outer);
  holes.forEach((h) => tracePolygon(ctx, camera, h));
  ctx.fillStyle = DISPLAY_FILL;
  ctx.fill("evenodd");
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1.5;
  ctx.stroke();

  holes.forEach((h, i) => {
    ctx.beginPath();
    tracePolygon(ctx, camera, h);
    ctx.fillStyle = HOLE_FILL;
    ctx.fill();
    if (view.selection?.type === "hole" && view.selection.index === i) {
      ctx.strokeStyle = PINNED_STROKE;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  });

  if (ghost.outline !== null) {
    ctx.beginPath();
    tracePolygon(ctx, camera, ghost.outline);
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#888";
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.setLineDash([]);
  }

  if (view.overlays.anchors) {
    drawAnchors(ctx, size, scene, positions, camera);
  }

  for (const decal of scene.decals) {
    const ghosted = ghost.decal?.id === decal.id;
    const pos = ghosted ? ghost.decal!.pos : decalPosition(scene, positions, decal.id);
    const [sx, sy] = camera.worldToScreen(pos);
    const r = decal.radius * camera.scale;
    if (view.overlays.rBoxes) {
      ctx.beginPath();
      ctx.rect(sx - r, sy - r, 2 * r, 2 * r);
      ctx.setLineDash([3, 3]);
      ctx.strokeStyle = "#999";
      ctx.lineWidth = 1;
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.beginPath();
    ctx.arc(sx, sy, r, 0, 2 * Math.PI);
    ctx.fillStyle = view.overlays.residuals
      ? residualColor(decalResidual(scene, ghosted ? { ...positions, [decal.id]: pos } : positions, decal.id))
      : NEUTRAL_FILL;
    ctx.fill();
    const selected = view.selection?.type === "decal" && view.selection.id === decal.id;
    ctx.strokeStyle = selected || ghosted ? PINNED_STROKE : "#35506e";
    ctx.lineWidth = selected || ghosted ? 2.5 : 1;
    ctx.stroke();
  }

  if (view.overlays.costReadout && layout !== null) {
    ctx.fillStyle = "#222";
    ctx.font = "12px monospace";
    const lines = [
      `revision ${layout.revision}   total ${layout.total_cost.toFixed(3)}`,
      ...Object.entries(layout.per_kind_cost).map(([kind, cost]) => `${kind} ${cost.toFixed(3)}`),
      `${layout.iterations} iterations in ${layout.elapsed_ms.toFixed(1)} ms`,
    ];
    lines.forEach((line, i) => ctx.fillText(line, 12, 18 + 14 * i));
  }
  return true;
}

function drawAnchors(
  ctx: Draw2D,
  size: { width: number; height: number },
  scene: SceneDoc,
  positions: Record<string, Vec2>,
  camera: Camera,
): void {
  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = "#7a8aa0";
  ctx.lineWidth = 1;
  for (const group of scene.groups ?? []) {
    for (const anchor of group.anchors ?? []) {
      let coord = anchor.coord;
      if (anchor.mode === "floating" && group.members.length > 0) {
        // floating lines sit at the member mean, same rule the solver uses
        const axis = anchor.axis === "vertical" ? 0 : 1;
        coord =
          group.members
            .map((m) => decalPosition(scene, positions, m)[axis])
            .reduce((a, b) => a + b, 0) / group.members.length;
      }
      ctx.beginPath();
      if (anchor.axis === "vertical") {
        const [sx] = camera.worldToScreen([coord, 0]);
        ctx.moveTo(sx, 0);
        ctx.lineTo(sx, size.height);
      } else {
        const [, sy] = camera.worldToScreen([0, coord]);
        ctx.moveTo(0, sy);
        ctx.lineTo(size.width, sy);
      }
      ctx.stroke();
    }
  }
  ctx.setLineDash([]);
}
