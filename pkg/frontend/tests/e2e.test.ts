// End-to-end contract test against the real service: spawns
// `python3 -m pfsim.cli serve`, connects with the same LiveSession the
// browser uses (ws standing in for the browser WebSocket), and checks
// frame rate, steering effect, and reconnect across a service restart.
import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { parseFrame, StateFrame } from "../src/protocol.js";
import { LiveSession, SocketLike } from "../src/socket.js";
import { ViewStore } from "../src/store.js";

const PORT = 8765 + (process.pid % 500);
const URL = `ws://127.0.0.1:${PORT}/ws`;

let server: ChildProcess | null = null;

function startServer(): ChildProcess {
  const proc = spawn(
    "python3",
    ["-m", "pfsim.cli", "serve", "lost_target", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  return proc;
}

async function stopServer(proc: ChildProcess | null): Promise<void> {
  if (proc === null) return;
  proc.kill("SIGTERM");
  await new Promise((resolve) => {
    proc.once("exit", resolve);
    setTimeout(resolve, 2000);
  });
}

function wsFactory(url: string): SocketLike {
  const socket = new WebSocket(url) as unknown as SocketLike & WebSocket;
  return socket;
}

interface Client {
  session: LiveSession;
  store: ViewStore;
  frames: StateFrame[];
  statuses: string[];
}

function makeClient(): Client {
  const store = new ViewStore();
  const frames: StateFrame[] = [];
  const statuses: string[] = [];
  const session = new LiveSession(
    URL,
    {
      onFrame: (raw) => {
        const frame = parseFrame(raw);
        store.applyRaw(frame);
        if (frame?.type === "state") frames.push(frame);
      },
      onStatus: (s) => {
        statuses.push(s);
        store.setStatus(s);
      },
    },
    wsFactory,
  );
  return { session, store, frames, statuses };
}

async function waitFor(cond: () => boolean, ms: number, what: string): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > ms) throw new Error(`timeout waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

beforeAll(async () => {
  server = startServer();
  const probe = makeClient();
  probe.session.connect();
  await waitFor(() => probe.store.init !== null, 15000, "service startup");
  probe.session.close();
}, 20000);

afterAll(async () => {
  await stopServer(server);
});

describe("live service contract", () => {
  it("streams monotone-t state frames at >= 8 Hz", async () => {
    const client = makeClient();
    client.session.connect();
    await waitFor(() => client.frames.length >= 20, 10000, "20 state frames");
    const ts = client.frames.map((f) => f.t);
    for (let i = 1; i < ts.length; i++) expect(ts[i]).toBeGreaterThan(ts[i - 1]);
    const span = ts[ts.length - 1] - ts[0];
    const wall = (client.frames.length - 1) / span; // sim seconds track wall here
    expect(wall).toBeGreaterThanOrEqual(8);
    client.session.close();
  }, 15000);

  it("steer burst changes the target's velocity in the next snapshots", async () => {
    const client = makeClient();
    client.session.connect();
    await waitFor(() => client.frames.length >= 3, 10000, "stream up");
    const burst = setInterval(
      () => client.session.send({ type: "steer", vx: 0.0, vy: 0.9 }),
      100,
    );
    try {
      await waitFor(
        () => {
          const last = client.frames[client.frames.length - 1];
          const target = last.persons.find((p) => p.is_target);
          return target !== undefined && target.vy > 0.3;
        },
        8000,
        "steered velocity visible in snapshots",
      );
    } finally {
      clearInterval(burst);
    }
    client.session.close();
  }, 15000);

  it("reconnects after a service restart", async () => {
    const client = makeClient();
    client.session.connect();
    await waitFor(() => client.store.status === "connected", 10000, "first connect");
    await stopServer(server);
    server = null;
    await waitFor(() => client.store.status === "reconnecting", 8000, "drop detected");
    server = startServer();
    await waitFor(() => client.store.status === "connected", 20000, "reconnect");
    const countAtReconnect = client.frames.length;
    await waitFor(
      () => client.frames.length >= countAtReconnect + 5,
      10000,
      "frames after reconnect",
    );
    client.session.close();
  }, 45000);
});
