// Canvas rendering of one snapshot. Drawing goes through a structural
// subset of CanvasRenderingContext2D so tests can pass a recording stub.

import { InitFrame, StateFrame } from "./protocol.js";
import { OverlayToggles } from "./store.js";
import { Segment } from "./timeline.js";

export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export const ACTION_COLORS: Record<string, string> = {
  follow_target: "#2e9e4f",
  navigate_to_prediction: "#3b6fd4",
  gaze_search: "#d4a23b",
  waypoint_search: "#c24fd1",
  "": "#666666",
};

export interface Viewport {
  width: number;
  height: number;
  bounds: [number, number, number, number];
}

export function worldToScreen(
  vp: Viewport,
  x: number,
  y: number,
): [number, number] {
  const [x0, y0, x1, y1] = vp.bounds;
  const sx = vp.width / (x1 - x0);
  const sy = vp.height / (y1 - y0);
  const s = Math.min(sx, sy);
  // y grows upward in the world, downward on canvas
  return [(x - x0) * s, vp.height - (y - y0) * s];
}

function poly(ctx: Draw2D, vp: Viewport, points: [number, number][]): void {
  ctx.beginPath();
  points.forEach(([x, y], i) => {
    const [px, py] = worldToScreen(vp, x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.closePath();
}

export function renderScene(
  ctx: Draw2D,
  vp: Viewport,
  init: InitFrame,
  snapshot: StateFrame | null,
  toggles: OverlayToggles,
): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, vp.width, vp.height);

  for (const region of init.regions) {
    ctx.globalAlpha = 0.06;
    ctx.fillStyle = "#3b6fd4";
    poly(ctx, vp, region.polygon);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#444444";
  for (const wall of init.obstacles) {
    poly(ctx, vp, wall);
    ctx.fill();
  }
  if (snapshot === null) return;

  if (toggles.belief && snapshot.belief_summary.coarse) {
    const c = snapshot.belief_summary.coarse;
    const [ox, oy] = c.origin;
    for (let iy = 0; iy < c.h; iy++) {
      for (let ix = 0; ix < c.w; ix++) {
        const v = c.values[iy * c.w + ix];
        if (v <= 0.5) continue;
        const [px, py] = worldToScreen(vp, ox + ix * c.cell, oy + (iy + 1) * c.cell);
        const [qx, qy] = worldToScreen(vp, ox + (ix + 1) * c.cell, oy + iy * c.cell);
        ctx.globalAlpha = Math.min((v - 0.5) * 1.6, 0.8);
        ctx.fillStyle = "#e05050";
        ctx.fillRect(px, py, qx - px, qy - py);
      }
    }
    ctx.globalAlpha = 1;
  }

  if (toggles.frontiers) {
    ctx.fillStyle = "#27b5b0";
    for (const [fx, fy] of snapshot.frontiers) {
      const [px, py] = worldToScreen(vp, fx, fy);
      ctx.fillRect(px - 1.5, py - 1.5, 3, 3);
    }
  }

  if (toggles.prediction && snapshot.prediction.length > 0) {
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#3b6fd4";
    ctx.lineWidth = 2;
    ctx.beginPath();
    snapshot.prediction.forEach(([, x, y], i) => {
      const [px, py] = worldToScreen(vp, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.setLineDash([]);
  }

  for (const person of snapshot.persons) {
    const [px, py] = worldToScreen(vp, person.x, person.y);
    ctx.fillStyle = person.is_target ? "#e0483b" : "#888888";
    ctx.beginPath();
    ctx.arc(px, py, 7, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#222222";
    ctx.font = "11px sans-serif";
    ctx.fillText(person.id, px + 9, py - 4);
  }

  const r = snapshot.robot;
  const [rx, ry] = worldToScreen(vp, r.x, r.y);
  // gaze cone
  const gaze = r.heading + r.pan;
  ctx.globalAlpha = 0.18;
  ctx.fillStyle = "#d4a23b";
  ctx.beginPath();
  ctx.moveTo(rx, ry);
  const coneHalf = Math.PI / 6;
  const coneLen = 60;
  ctx.lineTo(
    rx + coneLen * Math.cos(-(gaze - coneHalf)),
    ry + coneLen * Math.sin(-(gaze - coneHalf)),
  );
  ctx.lineTo(
    rx + coneLen * Math.cos(-(gaze + coneHalf)),
    ry + coneLen * Math.sin(-(gaze + coneHalf)),
  );
  ctx.closePath();
  ctx.fill();
  ctx.globalAlpha = 1;
  // base + heading tick
  ctx.fillStyle = "#1f5fd0";
  ctx.beginPath();
  ctx.arc(rx, ry, 8, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#ffffff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(rx, ry);
  ctx.lineTo(rx + 12 * Math.cos(-r.heading), ry + 12 * Math.sin(-r.heading));
  ctx.stroke();

  if (toggles.action) {
    ctx.fillStyle = ACTION_COLORS[snapshot.active_action] ?? "#666666";
    ctx.font = "13px sans-serif";
    ctx.fillText(
      `${snapshot.active_action || "idle"}  |  ${snapshot.target_status}  |  t=${snapshot.t.toFixed(1)}s`,
      8,
      16,
    );
  }
}

export function renderTimeline(
  ctx: Draw2D,
  width: number,
  height: number,
  segments: Segment[],
  span: { start: number; end: number } | null,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#f0f0f0";
  ctx.fillRect(0, 0, width, height);
  if (span === null || span.end <= span.start) return;
  const scale = width / (span.end - span.start);
  for (const seg of segments) {
    const x0 = (seg.start - span.start) * scale;
    const x1 = Math.max((seg.end - span.start) * scale, x0 + 1);
    ctx.fillStyle = ACTION_COLORS[seg.action] ?? "#666666";
    ctx.fillRect(x0, 2, x1 - x0, height - 4);
  }
}
