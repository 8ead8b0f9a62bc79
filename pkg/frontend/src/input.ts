// Arrow-key state -> unit steering vector. Opposing keys cancel, and a
// zero vector means "send nothing" so an idle keyboard stays silent on
// the wire.

export class KeyState {
  private held = new Set<string>();

  down(code: string): void {
    this.held.add(code);
  }

  up(code: string): void {
    this.held.delete(code);
  }

  clear(): void {
    this.held.clear();
  }

  vector(): { x: number; y: number } {
    const x =
      (this.held.has("ArrowRight") ? 1 : 0) - (this.held.has("ArrowLeft") ? 1 : 0);
    const y =
      (this.held.has("ArrowUp") ? 1 : 0) - (this.held.has("ArrowDown") ? 1 : 0);
    if (x !== 0 && y !== 0) {
      const s = Math.SQRT1_2;
      return { x: x * s, y: y * s };
    }
    return { x, y };
  }

  get active(): boolean {
    const v = this.vector();
    return v.x !== 0 || v.y !== 0;
  }
}
