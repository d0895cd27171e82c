import type { Transport } from "../src/client.js";
import type { LayoutMessage, SceneDoc, Vec2 } from "../src/protocol.js";
import type { Draw2D } from "../src/render.js";

/** 200x120 display with one 40x40 hole and two decals on an anchored row. */
export function makeScene(): SceneDoc {
  return {
    display: {
      outer: [
        [0, 0],
        [200, 0],
        [200, 120],
        [0, 120],
      ],
      holes: [
        [
          [80, 40],
          [120, 40],
          [120, 80],
          [80, 80],
        ],
      ],
    },
    decals: [
      { id: "a", pos: [40, 60], radius: 10, group: "row" },
      { id: "b", pos: [160, 60], radius: 10, group: "row" },
    ],
    groups: [
      {
        id: "row",
        members: ["a", "b"],
        d_max: 150,
        anchors: [{ axis: "horizontal", coord: 60, mode: "fixed" }],
      },
    ],
  };
}

export function layoutFrame(revision: number, positions: Record<string, Vec2>): string {
  const msg: LayoutMessage = {
    kind: "layout",
    revision,
    positions,
    total_cost: 0,
    per_kind_cost: { gamut: 0, min_distance: 0, max_distance: 0, anchor: 0 },
    iterations: 3,
    elapsed_ms: 1.5,
  };
  return JSON.stringify(msg);
}

/** In-memory transport: captures sent frames, lets tests inject replies. */
export class FakeTransport implements Transport {
  sent: string[] = [];
  closed = false;
  onMessage: ((text: string) => void) | null = null;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.closed = true;
    this.onClose?.();
  }

  open(): void {
    this.onOpen?.();
  }

  reply(frame: string): void {
    this.onMessage?.(frame);
  }

  sentJson(): Record<string, unknown>[] {
    return this.sent.map((t) => JSON.parse(t) as Record<string, unknown>);
  }
}

type Op = { op: string; args: unknown[]; fillStyle: string; dash: number[] };

/** Records draw calls (with the fill/dash state at call time) for assertions. */
export class RecordingContext implements Draw2D {
  lineWidth = 1;
  strokeStyle = "#000";
  fillStyle = "#000";
  font = "10px sans-serif";
  globalAlpha = 1;
  ops: Op[] = [];
  private dash: number[] = [];

  private log(op: string, ...args: unknown[]): void {
    this.ops.push({ op, args, fillStyle: this.fillStyle, dash: [...this.dash] });
  }

  save(): void {
    this.log("save");
  }
  restore(): void {
    this.log("restore");
  }
  beginPath(): void {
    this.log("beginPath");
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", x, y);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", x, y);
  }
  closePath(): void {
    this.log("closePath");
  }
  arc(x: number, y: number, r: number, a0: number, a1: number): void {
    this.log("arc", x, y, r, a0, a1);
  }
  rect(x: number, y: number, w: number, h: number): void {
    this.log("rect", x, y, w, h);
  }
  fill(rule?: "evenodd" | "nonzero"): void {
    this.log("fill", rule);
  }
  stroke(): void {
    this.log("stroke");
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", x, y, w, h);
  }
  clearRect(x: number, y: number, w: number, h: number): void {
    this.log("clearRect", x, y, w, h);
  }
  fillText(text: string, x: number, y: number): void {
    this.log("fillText", text, x, y);
  }
  setLineDash(segments: number[]): void {
    this.dash = segments;
  }

  count(op: string): number {
    return this.ops.filter((o) => o.op === op).length;
  }

  calls(op: string): Op[] {
    return this.ops.filter((o) => o.op === op);
  }
}
