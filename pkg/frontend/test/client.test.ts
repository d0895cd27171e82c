import { beforeEach, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import type { DeltaDoc, LayoutMessage } from "../src/protocol.js";
import { FakeTransport, layoutFrame, makeScene } from "./helpers.js";

const nudge = (dx: number): DeltaDoc => ({ kind: "hole_moved", hole: 0, offset: [dx, 0] });

function staleFrame(): string {
  return JSON.stringify({
    kind: "error",
    code: "stale_revision",
    message: "client_revision 4 != 6",
  });
}

describe("SessionClient", () => {
  let client: SessionClient;
  let transport: FakeTransport;
  let layouts: LayoutMessage[];

  beforeEach(() => {
    client = new SessionClient();
    transport = new FakeTransport();
    layouts = [];
    client.onLayout((msg) => layouts.push(msg));
    client.attach(transport);
    transport.open();
  });

  function loadAndAck(): void {
    client.loadScene(makeScene());
    transport.reply(layoutFrame(1, { a: [40, 60], b: [160, 60] }));
  }

  it("loads a scene and adopts revision 1", () => {
    loadAndAck();
    expect(transport.sentJson()[0]?.kind).toBe("load_scene");
    expect(client.revision).toBe(1);
    expect(client.scene?.decals).toHaveLength(2);
    expect(client.epoch).toBe(1);
    expect(layouts).toHaveLength(1);
    expect(client.status.editsEnabled).toBe(true);
  });

  it("keeps at most one un-acknowledged burst in flight", () => {
    loadAndAck();
    client.applyDelta(nudge(5));
    client.applyDelta(nudge(5));
    client.applyDelta(nudge(5));
    // first delta went out alone; the others wait for its reply
    expect(transport.sent).toHaveLength(2);
    expect(client.inFlight).toBe(1);
    expect(client.queued).toBe(2);

    transport.reply(layoutFrame(2, {}));
    // now the remaining two go out together, revisions pipelined 2, 3
    expect(transport.sent).toHaveLength(4);
    const burst = transport.sentJson().slice(2);
    expect(burst.map((m) => m.client_revision)).toEqual([2, 3]);

    transport.reply(layoutFrame(4, {}));
    transport.reply(layoutFrame(4, {}));
    expect(client.revision).toBe(4);
    expect(client.inFlight).toBe(0);
  });

  it("mirrors accepted edits into the local scene", () => {
    loadAndAck();
    client.applyDelta(nudge(10));
    transport.reply(layoutFrame(2, {}));
    expect(client.scene?.display.holes?.[0]?.[0]).toEqual([90, 40]);
    client.setWeights({ gamut: 3 });
    transport.reply(layoutFrame(3, {}));
    expect(client.scene?.weights).toEqual({ gamut: 3 });
  });

  it("drops deltas sent before any scene is loaded", () => {
    client.applyDelta(nudge(1));
    expect(transport.sent).toHaveLength(0);
  });

  it("re-syncs exactly once on stale_revision and replays the bounced deltas", () => {
    loadAndAck();
    client.applyDelta(nudge(1));
    client.applyDelta(nudge(5)); // these two queue up behind the first...
    client.applyDelta(nudge(7));
    transport.reply(layoutFrame(2, {})); // ...and now go out as one burst
    // both burst frames get bounced: some other writer moved the session on
    transport.reply(staleFrame());
    transport.reply(staleFrame());

    const kinds = transport.sentJson().map((m) => m.kind);
    expect(kinds.filter((k) => k === "request_solve")).toHaveLength(1);
    expect(client.status.resyncing).toBe(true);

    transport.reply(layoutFrame(6, {}));
    expect(client.status.resyncing).toBe(false);
    const replayed = transport.sentJson().slice(-2);
    expect(replayed.map((m) => m.client_revision)).toEqual([6, 7]);
    expect(replayed.map((m) => (m.delta as DeltaDoc & { offset: [number, number] }).offset)).toEqual(
      [[5, 0], [7, 0]],
    );
    transport.reply(layoutFrame(8, {}));
    transport.reply(layoutFrame(8, {}));
    expect(client.revision).toBe(8);
  });

  it("holds new gestures back while re-syncing, then sends them after the replay", () => {
    loadAndAck();
    client.applyDelta(nudge(5));
    transport.reply(staleFrame());
    client.applyDelta(nudge(9)); // gesture continues mid-re-sync
    expect(transport.sentJson().at(-1)?.kind).toBe("request_solve");

    transport.reply(layoutFrame(3, {}));
    const tail = transport.sentJson().slice(-2);
    expect(tail.map((m) => (m.delta as { offset?: unknown }).offset)).toEqual([[5, 0], [9, 0]]);
    expect(tail.map((m) => m.client_revision)).toEqual([3, 4]);
  });

  it("never lets the rendered revision decrease", () => {
    loadAndAck();
    client.requestSolve();
    client.requestSolve();
    transport.reply(layoutFrame(1, { a: [1, 1] }));
    transport.reply(layoutFrame(0, { a: [9, 9] })); // out-of-order stale frame
    expect(layouts).toHaveLength(2);
    expect(client.lastLayout?.positions.a).toEqual([1, 1]);
  });

  it("a reloaded document restarts revisions without tripping the stale guard", () => {
    loadAndAck();
    client.applyDelta(nudge(5));
    transport.reply(layoutFrame(2, {}));
    client.loadScene(makeScene());
    transport.reply(layoutFrame(1, { a: [40, 60] }));
    expect(client.epoch).toBe(2);
    expect(client.lastLayout?.revision).toBe(1);
    expect(layouts.at(-1)?.revision).toBe(1);
  });

  it("disables edits on disconnect and reloads the scene on reconnect", () => {
    loadAndAck();
    client.applyDelta(nudge(5));
    transport.close();
    expect(client.status.connected).toBe(false);
    expect(client.status.editsEnabled).toBe(false);
    expect(client.inFlight).toBe(0);

    const transport2 = new FakeTransport();
    client.attach(transport2);
    transport2.open();
    expect(transport2.sentJson()[0]?.kind).toBe("load_scene");
    transport2.reply(layoutFrame(1, { a: [40, 60], b: [160, 60] }));
    expect(client.status.editsEnabled).toBe(true);
    expect(client.revision).toBe(1);
  });

  it("surfaces non-stale errors with the request that caused them", () => {
    loadAndAck();
    const seen: string[] = [];
    client.onServerError((err, request) => seen.push(`${err.code}:${request.kind}`));
    client.applyDelta(nudge(5));
    transport.reply(
      JSON.stringify({ kind: "error", code: "bad_request", message: "no such hole" }),
    );
    expect(seen).toEqual(["bad_request:apply_delta"]);
  });

  it("closes the connection on a garbled frame instead of desyncing replies", () => {
    loadAndAck();
    client.requestSolve();
    transport.reply("{not json");
    expect(transport.closed).toBe(true);
    expect(client.status.connected).toBe(false);
  });
});
