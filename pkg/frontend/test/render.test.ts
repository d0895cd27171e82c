import { beforeEach, describe, expect, it } from "vitest";

import { Camera } from "../src/camera.js";
import type { LayoutMessage } from "../src/protocol.js";
import { NEUTRAL_FILL, renderFrame, residualColor, type ViewState } from "../src/render.js";
import { layoutFrame, makeScene, RecordingContext } from "./helpers.js";

const SIZE = { width: 800, height: 600 };

function layout(revision: number, positions: Record<string, [number, number]>): LayoutMessage {
  return JSON.parse(layoutFrame(revision, positions)) as LayoutMessage;
}

function freshView(overrides: Partial<ViewState["overlays"]> = {}): ViewState {
  const camera = new Camera();
  camera.fitTo([0, 0], [200, 120], SIZE.width, SIZE.height);
  return {
    camera,
    overlays: { residuals: true, anchors: false, rBoxes: false, costReadout: false, ...overrides },
    selection: null,
    lastRenderedRevision: 0,
  };
}

describe("renderFrame", () => {
  let ctx: RecordingContext;

  beforeEach(() => {
    ctx = new RecordingContext();
  });

  it("draws every decal and every hole", () => {
    const scene = makeScene();
    const drawn = renderFrame(ctx, SIZE, scene, layout(1, { a: [40, 60], b: [160, 60] }), freshView());
    expect(drawn).toBe(true);
    expect(ctx.count("arc")).toBe(scene.decals.length);
    // display path = outer ring + one subpath per hole, punched via even-odd
    const displayFill = ctx.calls("fill").find((op) => op.args[0] === "evenodd");
    expect(displayFill).toBeDefined();
    const moveTos = ctx.count("moveTo");
    expect(moveTos).toBeGreaterThanOrEqual(1 + (scene.display.holes?.length ?? 0));
  });

  it("drops frames older than what is already on screen", () => {
    const scene = makeScene();
    const view = freshView();
    expect(renderFrame(ctx, SIZE, scene, layout(5, {}), view)).toBe(true);
    const ops = ctx.ops.length;
    expect(renderFrame(ctx, SIZE, scene, layout(4, {}), view)).toBe(false);
    expect(ctx.ops.length).toBe(ops); // nothing new drawn
    expect(view.lastRenderedRevision).toBe(5);
  });

  it("renders a zero-cost layout with every decal in the neutral colour", () => {
    const scene = makeScene();
    renderFrame(ctx, SIZE, scene, layout(1, { a: [40, 60], b: [160, 60] }), freshView());
    const fills = ctx
      .calls("fill")
      .filter((op) => op.args[0] === undefined)
      .map((op) => op.fillStyle);
    expect(fills.filter((f) => f === NEUTRAL_FILL)).toHaveLength(scene.decals.length);
  });

  it("highlights a decal the layout has left inside a hole", () => {
    const scene = makeScene();
    renderFrame(ctx, SIZE, scene, layout(1, { a: [100, 60], b: [160, 60] }), freshView());
    const fills = ctx
      .calls("fill")
      .filter((op) => op.args[0] === undefined)
      .map((op) => op.fillStyle);
    expect(fills).toContain(NEUTRAL_FILL); // "b" is fine
    expect(fills.some((f) => f !== NEUTRAL_FILL && f.startsWith("rgb"))).toBe(true); // "a" is hot
  });

  it("draws the positions the server sent, not the scene's original ones", () => {
    const scene = makeScene();
    const view = freshView();
    renderFrame(ctx, SIZE, scene, layout(1, { a: [70, 30], b: [160, 60] }), view);
    const [sx, sy] = view.camera.worldToScreen([70, 30]);
    const arcs = ctx.calls("arc").map((op) => [op.args[0], op.args[1]]);
    expect(arcs).toContainEqual([sx, sy]);
  });

  it("anchor lines and r-boxes appear only when toggled on", () => {
    const scene = makeScene();
    renderFrame(ctx, SIZE, scene, layout(1, {}), freshView());
    expect(ctx.count("rect")).toBe(0);
    const dashedOps = ctx.ops.filter((op) => op.op === "stroke" && op.dash.length > 0);
    expect(dashedOps).toHaveLength(0);

    const ctx2 = new RecordingContext();
    renderFrame(ctx2, SIZE, scene, layout(1, {}), freshView({ anchors: true, rBoxes: true }));
    expect(ctx2.count("rect")).toBe(scene.decals.length);
    expect(ctx2.ops.filter((op) => op.op === "stroke" && op.dash.length > 0).length).toBeGreaterThan(0);
  });

  it("cost readout prints totals and per-kind costs when enabled", () => {
    const scene = makeScene();
    renderFrame(ctx, SIZE, scene, layout(2, {}), freshView({ costReadout: true }));
    const texts = ctx.calls("fillText").map((op) => String(op.args[0]));
    expect(texts.some((t) => t.includes("revision 2"))).toBe(true);
    expect(texts.some((t) => t.startsWith("gamut"))).toBe(true);
    expect(texts.some((t) => t.startsWith("anchor"))).toBe(true);
  });

  it("renders from the scene itself before the first layout arrives", () => {
    const scene = makeScene();
    const drawn = renderFrame(ctx, SIZE, scene, null, freshView());
    expect(drawn).toBe(true);
    expect(ctx.count("arc")).toBe(scene.decals.length);
  });
});

describe("residualColor", () => {
  it("is neutral at zero and monotonically hotter after", () => {
    expect(residualColor(0)).toBe(NEUTRAL_FILL);
    expect(residualColor(-1)).toBe(NEUTRAL_FILL);
    const warm = residualColor(5);
    const hot = residualColor(40);
    expect(warm).not.toBe(NEUTRAL_FILL);
    expect(hot).not.toBe(warm);
  });
});
