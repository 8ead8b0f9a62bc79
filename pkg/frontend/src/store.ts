// Single state store the socket, input, and renderer share. Frames are
// applied through one reducer so the monotone-time guard has exactly one
// enforcement point: anything older than the rendered snapshot is
// discarded and never drawn.

import { InitFrame, ServerFrame, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "reconnecting";

export interface OverlayToggles {
  belief: boolean;
  frontiers: boolean;
  prediction: boolean;
  action: boolean;
}

export class ViewStore {
  status: ConnectionStatus = "connecting";
  init: InitFrame | null = null;
  snapshot: StateFrame | null = null;
  droppedStale = 0;
  errorBadge = 0;
  lastError = "";
  toggles: OverlayToggles = {
    belief: true,
    frontiers: true,
    prediction: true,
    action: true,
  };

  applyRaw(frame: ServerFrame | null): void {
    if (frame === null) {
      this.errorBadge += 1;
      return;
    }
    switch (frame.type) {
      case "init":
        this.init = frame;
        this.snapshot = null;
        return;
      case "error":
        this.errorBadge += 1;
        this.lastError = frame.msg;
        return;
      case "state":
        if (this.snapshot !== null && frame.t <= this.snapshot.t) {
          this.droppedStale += 1; // out of order: never rendered
          return;
        }
        this.snapshot = frame;
        return;
    }
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
    if (status !== "connected") {
      // a reconnect starts a fresh timeline; t may restart from zero
      this.snapshot = null;
    }
  }

  get paused(): boolean {
    return this.snapshot?.paused ?? false;
  }
}
