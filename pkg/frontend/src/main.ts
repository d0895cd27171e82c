/** Browser wiring: DOM controls + pointer events -> client/gestures -> canvas. */
import { Camera } from "./camera.js";
import { SessionClient, webSocketTransport } from "./client.js";
import { GestureController } from "./gestures.js";
import type { SceneDoc, Vec2 } from "./protocol.js";
import { renderFrame, type ViewState } from "./render.js";
import { hitTest, sceneBounds } from "./scene.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

function mount(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("no 2d context");
  const banner = el<HTMLDivElement>("banner");
  const status = el<HTMLSpanElement>("status");

  const client = new SessionClient();
  const view: ViewState = {
    camera: new Camera(),
    overlays: { residuals: true, anchors: true, rBoxes: false, costReadout: true },
    selection: null,
    lastRenderedRevision: 0,
  };
  const gestures = new GestureController((delta) => client.applyDelta(delta));

  let fitted = false;
  client.onLayout(() => {
    if (!fitted && client.scene !== null) {
      const { min, max } = sceneBounds(client.scene);
      view.camera.fitTo(min, max, canvas.width, canvas.height);
      fitted = true;
    }
  });
  client.onStatus((s) => {
    banner.style.display = s.connected ? "none" : "block";
    status.textContent = s.connected ? (s.resyncing ? "re-syncing" : "live") : "disconnected";
  });
  client.onServerError((err) => {
    status.textContent = `${err.code}: ${err.message}`;
  });

  const connect = () => {
    const url = el<HTMLInputElement>("ws-url").value;
    client.attach(webSocketTransport(url));
  };
  el<HTMLButtonElement>("connect").addEventListener("click", connect);

  el<HTMLInputElement>("scene-file").addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      const scene = JSON.parse(text) as SceneDoc;
      fitted = false;
      client.loadScene(scene);
    });
  });

  el<HTMLButtonElement>("resolve").addEventListener("click", () => client.requestSolve());

  for (const key of ["residuals", "anchors", "rBoxes", "costReadout"] as const) {
    const box = el<HTMLInputElement>(`toggle-${key}`);
    box.checked = view.overlays[key];
    box.addEventListener("change", () => {
      view.overlays[key] = box.checked;
    });
  }

  const weightInputs = ["gamut", "min_distance", "max_distance", "anchor"] as const;
  const pushWeights = () => {
    const weights: Record<string, number> = {};
    for (const key of weightInputs) {
      weights[key] = Number(el<HTMLInputElement>(`w-${key}`).value);
    }
    client.setWeights(weights);
  };
  weightInputs.forEach((key) => el<HTMLInputElement>(`w-${key}`).addEventListener("change", pushWeights));

  const toWorld = (ev: PointerEvent): Vec2 => {
    const rect = canvas.getBoundingClientRect();
    return view.camera.screenToWorld([ev.clientX - rect.left, ev.clientY - rect.top]);
  };

  let panning: Vec2 | null = null;
  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const world = toWorld(ev);
    if (client.scene === null) return;
    const hit = hitTest(client.scene, client.lastLayout?.positions ?? {}, world, 8 / view.camera.scale);
    if (hit.type === "none") {
      panning = [ev.clientX, ev.clientY];
      view.selection = null;
    } else {
      if (hit.type === "decal") view.selection = { type: "decal", id: hit.id };
      else if (hit.type === "hole") view.selection = { type: "hole", index: hit.index };
      gestures.pointerDown(world, hit);
    }
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (panning !== null) {
      view.camera.panBy(ev.clientX - panning[0], ev.clientY - panning[1]);
      panning = [ev.clientX, ev.clientY];
      return;
    }
    if (!gestures.active) return;
    const world = toWorld(ev);
    gestures.pointerMove(world, [
      ev.movementX / view.camera.scale,
      ev.movementY / view.camera.scale,
    ]);
  });
  canvas.addEventListener("pointerup", (ev) => {
    panning = null;
    if (gestures.active && client.scene !== null) {
      gestures.pointerUp(toWorld(ev), client.scene.display);
    }
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    view.camera.zoomAt([ev.clientX - rect.left, ev.clientY - rect.top], ev.deltaY < 0 ? 1.1 : 1 / 1.1);
  });

  let epoch = 0;
  const frame = () => {
    if (client.epoch !== epoch) {
      epoch = client.epoch;
      view.lastRenderedRevision = 0;
    }
    if (client.scene !== null) {
      renderFrame(
        ctx,
        { width: canvas.width, height: canvas.height },
        client.scene,
        client.lastLayout,
        view,
        gestures.ghost(client.scene),
      );
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
  connect();
}

mount();
