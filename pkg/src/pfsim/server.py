"""Live WebSocket bridge: the simulation loop plus steering input.

One background task owns the simulation and steps it at tick rate
(wall-clock paced unless realtime=False, which steps as fast as clients
read). Clients receive an init frame (static map geometry) followed by
state frames; they may send steer/pause/resume/reset messages. Steering
messages are never dropped; state frames are dropped oldest-first when a
client cannot keep up, so a slow viewer never stalls the simulation.
"""
from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .engine import Simulation
from .scenario import Scenario

_QUEUE_FRAMES = 32


def _init_frame(scenario: Scenario) -> dict:
    regions = []
    if scenario.region_graph is not None:
        regions = [
            {"id": r.id, "name": r.name, "polygon": r.polygon.tolist()}
            for r in scenario.region_graph.regions
        ]
    return {
        "type": "init",
        "name": scenario.name,
        "bounds": list(scenario.bounds),
        "resolution": scenario.resolution,
        "obstacles": [p.tolist() for p in scenario.obstacles],
        "regions": regions,
        "target_id": scenario.target_id,
        "tick_hz": scenario.tick_hz,
    }


@dataclass
class _Hub:
    scenario: Scenario
    realtime: bool = True
    sim: Simulation = None
    clients: list[asyncio.Queue] = field(default_factory=list)
    inbox: asyncio.Queue = field(default_factory=asyncio.Queue)
    stopping: bool = False

    def __post_init__(self):
        self.sim = Simulation(self.scenario)

    def broadcast(self, frame: dict) -> None:
        for q in self.clients:
            while q.full():
                try:
                    q.get_nowait()  # drop oldest frame; steering never queues here
                except asyncio.QueueEmpty:
                    break
            q.put_nowait(frame)

    def apply_message(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "steer":
            self.sim.set_steer(float(msg["vx"]), float(msg["vy"]))
        elif kind == "pause":
            self.sim.paused = True
        elif kind == "resume":
            self.sim.paused = False
        elif kind == "reset":
            self.sim = Simulation(self.scenario)
        else:
            raise ValueError(f"unknown message type {kind!r}")

    async def loop(self) -> None:
        period = 1.0 / self.scenario.tick_hz
        loop = asyncio.get_running_loop()
        next_at = loop.time()
        while not self.stopping:
            while not self.inbox.empty():
                msg, reply = self.inbox.get_nowait()
                try:
                    self.apply_message(msg)
                except Exception as exc:
                    if reply is not None:
                        reply.put_nowait({"type": "error", "msg": str(exc)})
            if not self.sim.paused:
                self.sim.step()
                self.broadcast(self.sim.snapshot())
            if self.realtime:
                next_at += period
                delay = next_at - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_at = loop.time()
            else:
                await asyncio.sleep(0)


def make_app(scenario: Scenario, realtime: bool = True) -> FastAPI:
    hub = _Hub(scenario=scenario, realtime=realtime)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        hub.stopping = False
        task = asyncio.create_task(hub.loop())
        yield
        hub.stopping = True
        task.cancel()

    app = FastAPI(title="pfsim service", lifespan=lifespan)
    app.state.hub = hub

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=_QUEUE_FRAMES)
        hub.clients.append(queue)
        await ws.send_text(json.dumps(_init_frame(scenario)))

        async def pump_out():
            while True:
                frame = await queue.get()
                await ws.send_text(json.dumps(frame, separators=(",", ":")))

        sender = asyncio.create_task(pump_out())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("frame must be a JSON object")
                except (json.JSONDecodeError, ValueError) as exc:
                    await ws.send_text(
                        json.dumps({"type": "error", "msg": f"malformed frame: {exc}"})
                    )
                    continue
                hub.inbox.put_nowait((msg, queue))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            if queue in hub.clients:
                hub.clients.remove(queue)

    return app
