// Browser wiring: DOM, keyboard, socket, render loop.

import { KeyState } from "./input.js";
import { parseFrame } from "./protocol.js";
import { renderScene, renderTimeline, Viewport } from "./render.js";
import { LiveSession } from "./socket.js";
import { startSteerLoop } from "./steer.js";
import { ViewStore } from "./store.js";
import { ActionTimeline } from "./timeline.js";

const store = new ViewStore();
const keys = new KeyState();
const timeline = new ActionTimeline(60);

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const strip = document.getElementById("timeline") as HTMLCanvasElement;
const statusEl = document.getElementById("status")!;
const badgeEl = document.getElementById("errors")!;

const params = new URLSearchParams(location.search);
const url =
  params.get("ws") ?? `ws://${location.hostname || "127.0.0.1"}:${params.get("port") ?? "8700"}/ws`;
const speed = Number(params.get("speed") ?? "1.0");

const session = new LiveSession(
  url,
  {
    onFrame: (raw) => {
      const frame = parseFrame(raw);
      store.applyRaw(frame);
      if (frame?.type === "state") {
        timeline.push(frame.t, frame.active_action);
      }
    },
    onStatus: (s) => store.setStatus(s),
  },
  (u) => new WebSocket(u),
);
session.connect();

window.addEventListener("keydown", (ev) => {
  if (ev.code.startsWith("Arrow")) {
    keys.down(ev.code);
    ev.preventDefault();
  } else if (ev.code === "Space") {
    session.send({ type: store.paused ? "resume" : "pause" });
    ev.preventDefault();
  } else if (ev.code === "KeyR") {
    session.send({ type: "reset" });
  }
});
window.addEventListener("keyup", (ev) => keys.up(ev.code));
window.addEventListener("blur", () => keys.clear());

for (const name of ["belief", "frontiers", "prediction", "action"] as const) {
  const box = document.getElementById(`toggle-${name}`) as HTMLInputElement | null;
  box?.addEventListener("change", () => {
    store.toggles[name] = box.checked;
  });
}

startSteerLoop({
  keys,
  connected: () => store.status === "connected",
  paused: () => store.paused,
  speed,
  send: (msg) => session.send(msg),
});

function frame(): void {
  statusEl.textContent = store.status + (store.paused ? " (paused)" : "");
  badgeEl.textContent = store.errorBadge > 0 ? `errors: ${store.errorBadge}` : "";
  if (store.init !== null) {
    const vp: Viewport = {
      width: canvas.width,
      height: canvas.height,
      bounds: store.init.bounds,
    };
    const ctx = canvas.getContext("2d")!;
    renderScene(ctx, vp, store.init, store.snapshot, store.toggles);
    const sctx = strip.getContext("2d")!;
    renderTimeline(sctx, strip.width, strip.height, timeline.segments(), timeline.span);
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
