/** Pointer gestures -> scene deltas.
 *
 * Hole drags stream `hole_moved` offsets throttled to at most one frame per
 * `minIntervalMs` (default 30/s), accumulating between emits so the offsets
 * always sum to the true displacement; the drop flushes the remainder. Decal
 * drags pin the decal to the pointer while it moves, then release on drop
 * (`pinned: false` with the drop position hands it back to the solver).
 * Outer-boundary vertex drags render as a local ghost and emit one
 * `gamut_replaced` on drop.
 */
import type { DeltaDoc, DisplayDoc, SceneDoc, Vec2 } from "./protocol.js";
import type { Hit } from "./scene.js";

export interface DragGhost {
  /** Pending outer polygon while a vertex drag is live. */
  outline: Vec2[] | null;
  /** Decal being dragged, drawn at the pointer. */
  decal: { id: string; pos: Vec2 } | null;
}

interface HoleDrag {
  type: "hole";
  index: number;
  pendingOffset: Vec2;
  lastEmit: number;
}

interface DecalDrag {
  type: "decal";
  id: string;
  pos: Vec2;
  lastEmit: number;
  moved: boolean;
}

interface VertexDrag {
  type: "vertex";
  index: number;
  pos: Vec2;
}

type Drag = HoleDrag | DecalDrag | VertexDrag;

export class GestureController {
  private drag: Drag | null = null;

  constructor(
    private readonly emit: (delta: DeltaDoc) => void,
    private readonly now: () => number = () => performance.now(),
    private readonly minIntervalMs: number = 1000 / 30,
  ) {}

  get active(): boolean {
    return this.drag !== null;
  }

  /** What to draw on top of the authoritative layout while dragging. */
  ghost(scene: SceneDoc): DragGhost {
    const ghost: DragGhost = { outline: null, decal: null };
    const drag = this.drag;
    if (drag?.type === "vertex") {
      ghost.outline = scene.display.outer.map((v, i) => (i === drag.index ? drag.pos : v));
    } else if (drag?.type === "decal") {
      ghost.decal = { id: drag.id, pos: drag.pos };
    }
    return ghost;
  }

  pointerDown(world: Vec2, hit: Hit): void {
    if (this.drag !== null) return; // one drag at a time
    if (hit.type === "hole") {
      this.drag = { type: "hole", index: hit.index, pendingOffset: [0, 0], lastEmit: this.now() };
    } else if (hit.type === "decal") {
      this.drag = { type: "decal", id: hit.id, pos: world, lastEmit: this.now(), moved: false };
    } else if (hit.type === "vertex") {
      this.drag = { type: "vertex", index: hit.index, pos: world };
    }
  }

  pointerMove(world: Vec2, worldDelta: Vec2): void {
    const drag = this.drag;
    if (drag === null) return;
    if (drag.type === "hole") {
      drag.pendingOffset = [
        drag.pendingOffset[0] + worldDelta[0],
        drag.pendingOffset[1] + worldDelta[1],
      ];
      this.maybeEmitHole(drag, false);
    } else if (drag.type === "decal") {
      drag.pos = world;
      drag.moved = true;
      this.maybeEmitDecal(drag, false);
    } else {
      drag.pos = world;
    }
  }

  pointerUp(world: Vec2, display: DisplayDoc): void {
    const drag = this.drag;
    this.drag = null;
    if (drag === null) return;
    if (drag.type === "hole") {
      this.maybeEmitHole(drag, true);
    } else if (drag.type === "decal") {
      drag.pos = world;
      this.emit({ kind: "decal_pinned", id: drag.id, pinned: false, pos: world });
    } else {
      const outer = display.outer.map((v, i): Vec2 => (i === drag.index ? world : v));
      this.emit({ kind: "gamut_replaced", display: { outer, holes: display.holes ?? [] } });
    }
  }

  private maybeEmitHole(drag: HoleDrag, force: boolean): void {
    const [dx, dy] = drag.pendingOffset;
    if (dx === 0 && dy === 0) return;
    const t = this.now();
    if (!force && t - drag.lastEmit < this.minIntervalMs) return;
    drag.pendingOffset = [0, 0];
    drag.lastEmit = t;
    this.emit({ kind: "hole_moved", hole: drag.index, offset: [dx, dy] });
  }

  private maybeEmitDecal(drag: DecalDrag, force: boolean): void {
    const t = this.now();
    if (!force && t - drag.lastEmit < this.minIntervalMs) return;
    drag.lastEmit = t;
    this.emit({ kind: "decal_pinned", id: drag.id, pinned: true, pos: drag.pos });
  }
}
