/** Session client for the layout service.
 *
 * Outbound frames are queued and sent as bursts: a new burst goes out only
 * once every frame of the previous one has been answered (the service
 * guarantees exactly one reply per frame, in order), so there is at most one
 * un-acknowledged burst in flight and the service can coalesce drag storms
 * into a single solve. `apply_delta` revisions are assigned at send time,
 * pipelined within the burst (each accepted mutation bumps the server by 1).
 *
 * A `stale_revision` reply is handled transparently: the bounced delta is
 * parked, one `request_solve` re-syncs the revision, and the parked deltas
 * are replayed — gestures upstream never notice.
 */
import {
  encodeClientMessage,
  parseServerMessage,
  type ClientMessage,
  type DeltaDoc,
  type ErrorMessage,
  type LayoutMessage,
  type SceneDoc,
  type WeightsDoc,
} from "./protocol.js";
import { applySceneDelta } from "./scene.js";

export interface Transport {
  send(text: string): void;
  close(): void;
  onMessage: ((text: string) => void) | null;
  onOpen: (() => void) | null;
  onClose: (() => void) | null;
}

export function webSocketTransport(url: string): Transport {
  const ws = new WebSocket(url);
  const t: Transport = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onMessage: null,
    onOpen: null,
    onClose: null,
  };
  ws.onmessage = (ev) => t.onMessage?.(String(ev.data));
  ws.onopen = () => t.onOpen?.();
  ws.onclose = () => t.onClose?.();
  return t;
}

export interface ClientStatus {
  connected: boolean;
  resyncing: boolean;
  editsEnabled: boolean;
}

export class SessionClient {
  private transport: Transport | null = null;
  private connected = false;
  private resyncing = false;
  private outQueue: ClientMessage[] = [];
  private pending: ClientMessage[] = [];
  private replayQueue: DeltaDoc[] = [];
  private resyncFrame: ClientMessage | null = null;

  private layoutHandlers: ((msg: LayoutMessage) => void)[] = [];
  private errorHandlers: ((msg: ErrorMessage, request: ClientMessage) => void)[] = [];
  private statusHandlers: ((status: ClientStatus) => void)[] = [];

  revision = 0;
  scene: SceneDoc | null = null;
  lastLayout: LayoutMessage | null = null;
  /** Bumps on every accepted load_scene; a new document restarts revisions at 1. */
  epoch = 0;

  onLayout(cb: (msg: LayoutMessage) => void): void {
    this.layoutHandlers.push(cb);
  }

  onServerError(cb: (msg: ErrorMessage, request: ClientMessage) => void): void {
    this.errorHandlers.push(cb);
  }

  onStatus(cb: (status: ClientStatus) => void): void {
    this.statusHandlers.push(cb);
  }

  get status(): ClientStatus {
    return {
      connected: this.connected,
      resyncing: this.resyncing,
      editsEnabled: this.connected && this.scene !== null,
    };
  }

  /** Frames sent and awaiting their reply (current burst size). */
  get inFlight(): number {
    return this.pending.length;
  }

  get queued(): number {
    return this.outQueue.length;
  }

  attach(transport: Transport): void {
    this.transport = transport;
    transport.onMessage = (text) => this.handleFrame(text);
    transport.onOpen = () => {
      this.connected = true;
      // a fresh connection is a fresh server session: reload our scene
      if (this.scene !== null) {
        this.revision = 0;
        this.outQueue.unshift({ kind: "load_scene", scene: this.scene });
      }
      this.emitStatus();
      this.flush();
    };
    transport.onClose = () => {
      this.connected = false;
      this.outQueue = [];
      this.pending = [];
      this.replayQueue = [];
      this.resyncing = false;
      this.resyncFrame = null;
      this.emitStatus();
    };
  }

  loadScene(scene: SceneDoc): void {
    this.enqueue({ kind: "load_scene", scene });
  }

  applyDelta(delta: DeltaDoc): void {
    if (this.scene === null) return; // nothing loaded: nothing to edit
    this.enqueue({ kind: "apply_delta", delta, client_revision: 0 });
  }

  setWeights(weights: WeightsDoc): void {
    this.enqueue({ kind: "set_weights", weights });
  }

  requestSolve(): void {
    this.enqueue({ kind: "request_solve" });
  }

  private enqueue(msg: ClientMessage): void {
    this.outQueue.push(msg);
    this.flush();
  }

  private flush(): void {
    if (!this.connected || this.transport === null || this.pending.length > 0) return;
    if (this.resyncing) {
      // hold everything else back until the lone re-sync frame is answered
      if (this.resyncFrame !== null) {
        const frame = this.resyncFrame;
        this.resyncFrame = null;
        this.pending.push(frame);
        this.transport.send(encodeClientMessage(frame));
      }
      return;
    }
    if (this.outQueue.length === 0) return;
    const burst = this.outQueue;
    this.outQueue = [];
    let rev = this.revision;
    for (const msg of burst) {
      if (msg.kind === "load_scene") {
        rev = 1;
      } else if (msg.kind === "apply_delta") {
        msg.client_revision = rev;
        rev += 1;
      } else if (msg.kind === "set_weights") {
        rev += 1;
      }
      this.pending.push(msg);
      this.transport.send(encodeClientMessage(msg));
    }
  }

  private handleFrame(text: string): void {
    let msg: ReturnType<typeof parseServerMessage>;
    try {
      msg = parseServerMessage(text);
    } catch {
      this.transport?.close(); // reply matching is positional; a garbled frame desyncs it
      return;
    }
    const request = this.pending.shift();
    if (request === undefined) return; // unsolicited frame: nothing to match
    if (msg.kind === "layout") {
      this.revision = msg.revision;
      this.mirror(request);
      if (this.resyncing && request.kind === "request_solve") {
        this.resyncing = false;
        const replays = this.replayQueue;
        this.replayQueue = [];
        this.outQueue.unshift(
          ...replays.map(
            (delta): ClientMessage => ({ kind: "apply_delta", delta, client_revision: 0 }),
          ),
        );
        this.emitStatus();
      }
      if (this.lastLayout === null || msg.revision >= this.lastLayout.revision) {
        this.lastLayout = msg;
        this.layoutHandlers.forEach((cb) => cb(msg));
      }
    } else if (msg.code === "stale_revision" && request.kind === "apply_delta") {
      this.replayQueue.push(request.delta);
      if (!this.resyncing) {
        this.resyncing = true;
        this.resyncFrame = { kind: "request_solve" };
        this.emitStatus();
      }
    } else {
      this.errorHandlers.forEach((cb) => cb(msg, request));
    }
    this.flush();
  }

  /** Fold an accepted edit into the local geometry mirror. */
  private mirror(request: ClientMessage): void {
    if (request.kind === "load_scene") {
      this.scene = request.scene;
      this.lastLayout = null; // fresh document: revision counting restarts
      this.epoch += 1;
      this.emitStatus();
    } else if (request.kind === "apply_delta" && this.scene !== null) {
      this.scene = applySceneDelta(this.scene, request.delta);
    } else if (request.kind === "set_weights" && this.scene !== null) {
      this.scene = { ...this.scene, weights: request.weights };
    }
  }

  private emitStatus(): void {
    const s = this.status;
    this.statusHandlers.forEach((cb) => cb(s));
  }
}
