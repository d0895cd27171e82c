/** Pan/zoom between world (scene px, y-down) and screen (canvas px). */
import type { Vec2 } from "./protocol.js";

export class Camera {
  scale = 1;
  tx = 0;
  ty = 0;

  worldToScreen(p: Vec2): Vec2 {
    return [p[0] * this.scale + this.tx, p[1] * this.scale + this.ty];
  }

  screenToWorld(p: Vec2): Vec2 {
    return [(p[0] - this.tx) / this.scale, (p[1] - this.ty) / this.scale];
  }

  panBy(dxScreen: number, dyScreen: number): void {
    this.tx += dxScreen;
    this.ty += dyScreen;
  }

  /** Zoom by `factor`, keeping the world point under `anchor` fixed on screen. */
  zoomAt(anchor: Vec2, factor: number): void {
    const next = this.scale * factor;
    if (!Number.isFinite(next) || next <= 1e-6 || next >= 1e6) return;
    this.tx = anchor[0] - (anchor[0] - this.tx) * factor;
    this.ty = anchor[1] - (anchor[1] - this.ty) * factor;
    this.scale = next;
  }

  /** Fit a world bbox into a viewport with a uniform margin (px). */
  fitTo(min: Vec2, max: Vec2, width: number, height: number, margin = 24): void {
    const w = Math.max(max[0] - min[0], 1e-9);
    const h = Math.max(max[1] - min[1], 1e-9);
    this.scale = Math.min((width - 2 * margin) / w, (height - 2 * margin) / h);
    this.tx = (width - w * this.scale) / 2 - min[0] * this.scale;
    this.ty = (height - h * this.scale) / 2 - min[1] * this.scale;
  }
}
