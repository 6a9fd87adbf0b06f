"""Websocket teleoperation service.

One endpoint, ``/ws``. On connect the server sends a single ``meta``
message (robot geometry, workspace box, grid pitch), then streams one
``state`` message per control tick at the configured rate. Clients send
``{"type": "target", "x": ..., "y": ...}`` to move the goal (the newest
target wins; intermediate ones are dropped) and ``{"type": "reset"}`` to
restore the initial pose. Malformed input earns an ``error`` message and
the session keeps running.

Each connection owns an independent controller, seeded at the roadmap
assignment nearest the workspace center.
"""

import asyncio
import json

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .chain import TaskPoint, forward_kinematics
from .query import TeleopState, teleop_step
from .taskgraph import nearest_neighbors

DEFAULT_TICK_RATE = 50.0

# Dropping this far behind the tick schedule (seconds) means the host was
# suspended; re-anchor instead of bursting to catch up.
_REANCHOR_AFTER = 1.0


def _initial_vertex(roadmap):
    graph = roadmap.graph
    center = (graph.meta.lo + graph.meta.hi) / 2.0
    ids = roadmap.assigned_ids()
    return int(nearest_neighbors(graph, center, 1, candidates=ids)[0])


def _point_doc(translation):
    doc = {"x": float(translation[0]), "y": float(translation[1])}
    if len(translation) == 3:
        doc["z"] = float(translation[2])
    return doc


def _meta_doc(chain, graph):
    meta = graph.meta
    return {
        "type": "meta",
        "robot": chain.canonical_dict(),
        "mode": graph.mode.value,
        "workspace": {"lo": [float(x) for x in meta.lo],
                      "hi": [float(x) for x in meta.hi]},
        "grid_pitch": [float(x) for x in meta.pitch],
    }


class _Session:
    """Shared slots between a connection's reader and its tick loop.

    The reader never touches the socket's send side; it parks the newest
    target, flags, and error strings here for the tick loop to pick up, so
    there is exactly one writer per connection.
    """

    def __init__(self, initial_target):
        self.initial_target = initial_target
        self.target = initial_target
        self.reset_requested = False
        self.closed = False
        self.errors = []

    def apply(self, msg, dim):
        if not isinstance(msg, dict):
            self.errors.append("message must be a JSON object")
            return
        kind = msg.get("type")
        if kind == "reset":
            self.reset_requested = True
        elif kind == "target":
            try:
                coords = [float(msg["x"]), float(msg["y"])]
                if dim == 3:
                    coords.append(float(msg["z"]))
            except (KeyError, TypeError, ValueError):
                axes = "x, y" + (", z" if dim == 3 else "")
                self.errors.append(f"target needs numeric {axes}")
                return
            self.target = coords
        else:
            self.errors.append(f"unknown message type {kind!r}")


async def _read_messages(websocket, session, dim):
    try:
        while True:
            raw = await websocket.receive_text()
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                session.errors.append("message is not valid JSON")
                continue
            session.apply(msg, dim)
    except WebSocketDisconnect:
        pass
    finally:
        session.closed = True


def build_app(chain, roadmap, tick_rate=DEFAULT_TICK_RATE):
    """FastAPI app streaming teleop state for one chain + roadmap pair."""
    graph = roadmap.graph
    dim = len(graph.meta.lo)
    period = 1.0 / tick_rate
    meta_message = json.dumps(_meta_doc(chain, graph))
    home_vertex = _initial_vertex(roadmap)

    app = FastAPI()

    def fresh_state():
        state = TeleopState(current_config=roadmap.assignment(home_vertex))
        state.active_target = graph.task_point(home_vertex)
        return state

    def state_message(tick, state):
        q = state.current_config
        ee = forward_kinematics(chain, q, graph.mode)
        target = state.active_target
        return json.dumps({
            "type": "state",
            "tick": tick,
            "joints": [float(v) for v in q.values],
            "ee": _point_doc(ee.translation),
            "status": state.status.value,
            "target_effective": _point_doc(target.translation),
        })

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        await websocket.send_text(meta_message)
        state = fresh_state()
        session = _Session(list(graph.translations[home_vertex]))
        reader = asyncio.create_task(_read_messages(websocket, session, dim))
        loop = asyncio.get_running_loop()
        anchor = loop.time()
        tick = 0
        try:
            while not session.closed:
                while session.errors:
                    await websocket.send_text(json.dumps(
                        {"type": "error", "msg": session.errors.pop(0)}))
                if session.reset_requested:
                    session.reset_requested = False
                    session.target = session.initial_target
                    state = fresh_state()
                p_t = TaskPoint(np.asarray(session.target, dtype=float),
                                graph.fixed_orientation, graph.mode)
                teleop_step(state, p_t, roadmap, graph, chain)
                await websocket.send_text(state_message(tick, state))
                tick += 1
                delay = anchor + tick * period - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    # Behind schedule: yield so the reader task runs, and
                    # re-anchor after a long stall rather than bursting.
                    await asyncio.sleep(0)
                    if -delay > _REANCHOR_AFTER:
                        anchor = loop.time() - tick * period
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            reader.cancel()

    return app


def serve(chain, roadmap, port=8765, tick_rate=DEFAULT_TICK_RATE):
    """Run the service until interrupted (blocking)."""
    import uvicorn

    app = build_app(chain, roadmap, tick_rate=tick_rate)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
