/** Wire types for the layout service: JSON frames over a WebSocket. */

export type Vec2 = [number, number];

export interface WeightsDoc {
  gamut?: number;
  min_distance?: number;
  max_distance?: number;
  anchor?: number;
}

export interface AnchorDoc {
  axis: "vertical" | "horizontal";
  coord: number;
  mode: "fixed" | "floating";
}

export interface DecalDoc {
  id: string;
  pos: Vec2;
  radius: number;
  group?: string;
}

export interface GroupDoc {
  id: string;
  members: string[];
  d_max: number;
  anchors?: AnchorDoc[];
}

export interface DisplayDoc {
  outer: Vec2[];
  holes?: Vec2[][];
}

export interface SceneDoc {
  display: DisplayDoc;
  decals: DecalDoc[];
  groups?: GroupDoc[];
  weights?: WeightsDoc;
  solver?: Record<string, number | boolean>;
  reference_layout?: { id: string; pos: Vec2 }[];
}

export type DeltaDoc =
  | { kind: "gamut_replaced"; display: DisplayDoc }
  | { kind: "hole_added"; polygon: Vec2[] }
  | { kind: "hole_moved"; hole: number; offset: Vec2 }
  | { kind: "hole_removed"; hole: number }
  | { kind: "decal_added"; decal: DecalDoc }
  | { kind: "decal_removed"; id: string }
  | { kind: "decal_pinned"; id: string; pinned: boolean; pos?: Vec2 };

export type ClientMessage =
  | { kind: "load_scene"; scene: SceneDoc }
  | { kind: "apply_delta"; delta: DeltaDoc; client_revision: number }
  | { kind: "set_weights"; weights: WeightsDoc }
  | { kind: "request_solve" };

export interface LayoutMessage {
  kind: "layout";
  revision: number;
  positions: Record<string, Vec2>;
  total_cost: number;
  per_kind_cost: Record<string, number>;
  iterations: number;
  elapsed_ms: number;
}

export type ErrorCode =
  | "bad_request"
  | "stale_revision"
  | "no_session"
  | "no_scene"
  | "numeric";

export interface ErrorMessage {
  kind: "error";
  code: ErrorCode;
  message: string;
  field_path?: string;
}

export type ServerMessage = LayoutMessage | ErrorMessage;

export class ProtocolError extends Error {}

const ERROR_CODES: readonly string[] = [
  "bad_request",
  "stale_revision",
  "no_session",
  "no_scene",
  "numeric",
];

function isVec2(v: unknown): v is Vec2 {
  return (
    Array.isArray(v) &&
    v.length === 2 &&
    typeof v[0] === "number" &&
    typeof v[1] === "number" &&
    Number.isFinite(v[0]) &&
    Number.isFinite(v[1])
  );
}

function isNumberRecord(v: unknown): v is Record<string, number> {
  return (
    typeof v === "object" &&
    v !== null &&
    !Array.isArray(v) &&
    Object.values(v).every((n) => typeof n === "number")
  );
}

/** Decode one server frame; throws ProtocolError on anything malformed. */
export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("frame is not valid JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("frame is not an object");
  }
  const msg = raw as Record<string, unknown>;
  if (msg.kind === "layout") {
    if (typeof msg.revision !== "number" || !Number.isInteger(msg.revision)) {
      throw new ProtocolError("layout.revision must be an integer");
    }
    const positions = msg.positions;
    if (
      typeof positions !== "object" ||
      positions === null ||
      Array.isArray(positions) ||
      !Object.values(positions).every(isVec2)
    ) {
      throw new ProtocolError("layout.positions must map ids to [x, y]");
    }
    if (typeof msg.total_cost !== "number" || !isNumberRecord(msg.per_kind_cost)) {
      throw new ProtocolError("layout costs malformed");
    }
    if (typeof msg.iterations !== "number" || typeof msg.elapsed_ms !== "number") {
      throw new ProtocolError("layout counters malformed");
    }
    return {
      kind: "layout",
      revision: msg.revision,
      positions: positions as Record<string, Vec2>,
      total_cost: msg.total_cost,
      per_kind_cost: msg.per_kind_cost,
      iterations: msg.iterations,
      elapsed_ms: msg.elapsed_ms,
    };
  }
  if (msg.kind === "error") {
    if (typeof msg.code !== "string" || !ERROR_CODES.includes(msg.code)) {
      throw new ProtocolError(`unknown error code ${String(msg.code)}`);
    }
    if (typeof msg.message !== "string") {
      throw new ProtocolError("error.message must be a string");
    }
    const out: ErrorMessage = {
      kind: "error",
      code: msg.code as ErrorCode,
      message: msg.message,
    };
    if (msg.field_path !== undefined) {
      if (typeof msg.field_path !== "string") {
        throw new ProtocolError("error.field_path must be a string");
      }
      out.field_path = msg.field_path;
    }
    return out;
  }
  throw new ProtocolError(`unknown frame kind ${String(msg.kind)}`);
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
