// Reconnecting WebSocket wrapper with exponential backoff. The socket
// constructor is injected so tests (and the node e2e runner) can supply
// their own implementation.

export interface SocketLike {
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((ev?: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onmessage: ((ev: any) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionCallbacks {
  onFrame: (raw: string) => void;
  onStatus: (status: "connecting" | "connected" | "reconnecting") => void;
}

const BACKOFF_BASE_MS = 500;
const BACKOFF_MAX_MS = 8000;

export class LiveSession {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private callbacks: SessionCallbacks,
    private factory: SocketFactory,
  ) {}

  connect(): void {
    this.stopped = false;
    this.callbacks.onStatus(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.callbacks.onStatus("connected");
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data === "string") this.callbacks.onFrame(ev.data);
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => {
      /* the close handler drives the retry */
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    this.attempts += 1;
    this.callbacks.onStatus("reconnecting");
    const delay = Math.min(BACKOFF_BASE_MS * 2 ** (this.attempts - 1), BACKOFF_MAX_MS);
    this.timer = setTimeout(() => this.connect(), delay);
  }

  backoffDelay(): number {
    return Math.min(BACKOFF_BASE_MS * 2 ** Math.max(this.attempts - 1, 0), BACKOFF_MAX_MS);
  }

  send(data: object): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(JSON.stringify(data));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }
}
