import { describe, expect, it } from "vitest";

import { encodeClientMessage, parseServerMessage, ProtocolError } from "../src/protocol.js";
import { layoutFrame } from "./helpers.js";

describe("parseServerMessage", () => {
  it("decodes a layout frame", () => {
    const msg = parseServerMessage(layoutFrame(4, { a: [1, 2] }));
    expect(msg.kind).toBe("layout");
    if (msg.kind === "layout") {
      expect(msg.revision).toBe(4);
      expect(msg.positions.a).toEqual([1, 2]);
      expect(msg.per_kind_cost.gamut).toBe(0);
    }
  });

  it("decodes an error frame with and without field_path", () => {
    const bare = parseServerMessage(
      JSON.stringify({ kind: "error", code: "no_scene", message: "load a scene first" }),
    );
    expect(bare).toEqual({ kind: "error", code: "no_scene", message: "load a scene first" });
    const located = parseServerMessage(
      JSON.stringify({
        kind: "error",
        code: "bad_request",
        message: "bad",
        field_path: "scene.decals[0].radius",
      }),
    );
    if (located.kind === "error") expect(located.field_path).toBe("scene.decals[0].radius");
  });

  it.each([
    ["not json at all", "{nope"],
    ["non-object", "[1,2]"],
    ["unknown kind", JSON.stringify({ kind: "telemetry" })],
    ["fractional revision", JSON.stringify({ kind: "layout", revision: 1.5, positions: {} })],
    ["bad positions", JSON.stringify({ kind: "layout", revision: 1, positions: { a: [1] } })],
    ["unknown error code", JSON.stringify({ kind: "error", code: "teapot", message: "x" })],
  ])("rejects %s", (_name, frame) => {
    expect(() => parseServerMessage(frame)).toThrow(ProtocolError);
  });

  it("round-trips client frames with exactly the wire keys", () => {
    const encoded = encodeClientMessage({
      kind: "apply_delta",
      delta: { kind: "hole_moved", hole: 0, offset: [5, -3] },
      client_revision: 7,
    });
    const parsed = JSON.parse(encoded) as Record<string, unknown>;
    expect(Object.keys(parsed).sort()).toEqual(["client_revision", "delta", "kind"]);
    expect(parsed.delta).toEqual({ kind: "hole_moved", hole: 0, offset: [5, -3] });
  });
});
