// Steering pump: while keys are held and the session is live, emit a
// steer message every tick (10 Hz). Pure decision logic; the timer and
// the socket are injected so tests can drive it synchronously.

import { KeyState } from "./input.js";
import { SteerMessage } from "./protocol.js";

export interface SteerDeps {
  keys: KeyState;
  connected: () => boolean;
  paused: () => boolean;
  speed: number; // person speed scale, m/s
  send: (msg: SteerMessage) => void;
}

export const STEER_HZ = 10;

export function steerTick(deps: SteerDeps): SteerMessage | null {
  if (!deps.connected() || deps.paused()) return null;
  const v = deps.keys.vector();
  if (v.x === 0 && v.y === 0) return null;
  const msg: SteerMessage = {
    type: "steer",
    vx: v.x * deps.speed,
    vy: v.y * deps.speed,
  };
  deps.send(msg);
  return msg;
}

export function startSteerLoop(deps: SteerDeps): () => void {
  const id = setInterval(() => steerTick(deps), 1000 / STEER_HZ);
  return () => clearInterval(id);
}
