// Wire types for the pfsim service protocol, plus defensive parsing.
// Malformed frames are reported as null so the caller can count them
// without tearing down the session.

export interface RobotPose {
  x: number;
  y: number;
  heading: number;
  pan: number;
}

export interface PersonFrame {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  is_target: boolean;
}

export interface CoarseBelief {
  w: number;
  h: number;
  cell: number;
  origin: [number, number];
  values: number[];
}

export interface BeliefSummary {
  entropy: number;
  max: number;
  peak: [number, number] | null;
  coarse?: CoarseBelief;
}

export interface StateFrame {
  type: "state";
  t: number;
  robot: RobotPose;
  persons: PersonFrame[];
  belief_summary: BeliefSummary;
  frontiers: [number, number][];
  active_action: string;
  target_status: string;
  prediction: [number, number, number, boolean][];
  paused: boolean;
}

export interface InitFrame {
  type: "init";
  name: string;
  bounds: [number, number, number, number];
  resolution: number;
  obstacles: [number, number][][];
  regions: { id: number; name: string; polygon: [number, number][] }[];
  target_id: string;
  tick_hz: number;
}

export interface ErrorFrame {
  type: "error";
  msg: string;
}

export type ServerFrame = StateFrame | InitFrame | ErrorFrame;

export interface SteerMessage {
  type: "steer";
  vx: number;
  vy: number;
}

const isNum = (v: unknown): v is number => typeof v === "number" && isFinite(v);

export function parseFrame(raw: string): ServerFrame | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const d = doc as Record<string, unknown>;
  switch (d.type) {
    case "error":
      return typeof d.msg === "string" ? (d as unknown as ErrorFrame) : null;
    case "init": {
      if (!Array.isArray(d.bounds) || d.bounds.length !== 4) return null;
      if (!Array.isArray(d.obstacles)) return null;
      return d as unknown as InitFrame;
    }
    case "state": {
      if (!isNum(d.t)) return null;
      const robot = d.robot as Record<string, unknown> | undefined;
      if (!robot || !isNum(robot.x) || !isNum(robot.y) || !isNum(robot.heading)) {
        return null;
      }
      if (!Array.isArray(d.persons)) return null;
      return d as unknown as StateFrame;
    }
    default:
      return null;
  }
}
