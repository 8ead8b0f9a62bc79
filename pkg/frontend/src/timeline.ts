// Scrolling action timeline: remembers (t, action) pairs over a sliding
// window and exposes them as contiguous segments for the strip renderer.

export interface Segment {
  action: string;
  start: number;
  end: number;
}

export class ActionTimeline {
  private entries: { t: number; action: string }[] = [];

  constructor(private windowS = 60) {}

  push(t: number, action: string): void {
    const last = this.entries[this.entries.length - 1];
    if (last !== undefined && t < last.t) {
      // simulation restarted (reset/reconnect): start over
      this.entries = [];
    }
    this.entries.push({ t, action });
    const cutoff = t - this.windowS;
    while (this.entries.length > 0 && this.entries[0].t < cutoff) {
      this.entries.shift();
    }
  }

  segments(): Segment[] {
    const out: Segment[] = [];
    for (const e of this.entries) {
      const last = out[out.length - 1];
      if (last !== undefined && last.action === e.action) {
        last.end = e.t;
      } else {
        if (last !== undefined) last.end = e.t;
        out.push({ action: e.action, start: e.t, end: e.t });
      }
    }
    return out;
  }

  get span(): { start: number; end: number } | null {
    if (this.entries.length === 0) return null;
    return {
      start: this.entries[0].t,
      end: this.entries[this.entries.length - 1].t,
    };
  }
}
