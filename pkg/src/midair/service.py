"""Live session service: one editing session per socket connection.

Frames are JSON text messages. Client frames carry exactly one action
key plus an optional "seq" that is echoed back on every reply:

    {"event": <script-line object>, "seq": 7}
    {"load_scene": <scene document>, "seq": 8}
    {"request_mesh": {"resolution": 64}, "seq": 9}

Every event frame is answered by exactly one state frame (preceded by
an effects frame when the event produced effects). Scene-changing
effects schedule a mesh push; recomputes are debounced to one in
flight per connection, latest state wins. Malformed frames produce an
error frame and the session continues.
"""

from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .csg import Leaf, Op, Scene, iter_nodes
from .mesher import RESOLUTION_RANGE, GridSpec, TriangleMesh, polygonize, primitive_shell
from .sceneio import SceneSyntaxError, SchemaError, parse_scene
from .session import (
    OperatorChanged,
    SceneEdited,
    SessionState,
    display_states,
    event_from_json,
    handle_layout,
    information_board,
    new_session,
    step,
)

log = logging.getLogger("midair.service")

DEFAULT_RESOLUTION = 48


def _state_payload(state: SessionState) -> dict:
    layout = handle_layout(state)
    board = information_board(state)
    tree: list[dict] = []
    parents: dict[str, str | None] = {}
    for node in iter_nodes(state.scene.root):
        if isinstance(node, Op):
            for child in node.children:
                child_id = child.node_id if isinstance(child, Op) else child.primitive_id
                parents[child_id] = node.node_id
    for node in iter_nodes(state.scene.root):
        if isinstance(node, Leaf):
            pid = node.primitive_id
            tree.append(
                {
                    "id": pid,
                    "kind": "leaf",
                    "parent": parents.get(pid),
                    "children": [],
                    "highlighted": pid in state.highlighted,
                    "grabbed": state.grabbed_tree_node == pid,
                    "label": state.scene.primitives[pid].label,
                }
            )
        else:
            leaf_ids = [n.primitive_id for n in iter_nodes(node) if isinstance(n, Leaf)]
            tree.append(
                {
                    "id": node.node_id,
                    "kind": node.kind.value,
                    "parent": parents.get(node.node_id),
                    "children": [c.node_id if isinstance(c, Op) else c.primitive_id for c in node.children],
                    "highlighted": bool(leaf_ids) and all(pid in state.highlighted for pid in leaf_ids),
                    "grabbed": state.grabbed_tree_node == node.node_id,
                    "label": None,
                }
            )
    mode = state.mode
    mode_text = board.mode_text if board.active_transform is None else f"{board.mode_text}({board.active_transform.capitalize()})"
    return {
        "mode": mode_text,
        "display_states": display_states(state),
        "handle_layout": None
        if layout is None
        else {
            "origin": list(layout.origin.as_tuple()),
            "axis_length": layout.axis_length,
            "box_half": layout.box_half,
            "sphere_radius": layout.sphere_radius,
            "axis_box_centers": {
                "x": list(layout.axis_box_centers()[0].as_tuple()),
                "y": list(layout.axis_box_centers()[1].as_tuple()),
                "z": list(layout.axis_box_centers()[2].as_tuple()),
            },
        },
        "info_board": {
            "mode_text": board.mode_text,
            "active_transform": board.active_transform,
            "commands": [list(pair) for pair in board.commands],
        },
        "tree": tree,
        "tree_visible": state.tree_visible,
        "selected": sorted(state.selected),
        "highlighted": sorted(state.highlighted),
        "groups": [sorted(g) for g in state.groups],
        "hand_pos": list(state.hand_pos.as_tuple()),
        "grabbing": state.active_grab is not None,
    }


def _mesh_payload(mesh: TriangleMesh) -> dict:
    return {
        "vertices": [[float(c) for c in v] for v in mesh.vertices],
        "triangles": [[int(i) for i in t] for t in mesh.triangles],
    }


def _mesh_frame(scene: Scene, resolution: int, seq: int | None) -> dict:
    mesh = polygonize(scene, GridSpec(resolution=resolution))
    shells = {pid: _mesh_payload(primitive_shell(prim)) for pid, prim in sorted(scene.primitives.items())}
    return {
        "mesh": {"combined": _mesh_payload(mesh), "shells": shells, "resolution": resolution},
        "seq": seq,
    }


class _Connection:
    """Per-socket session plus the debounced mesh pump."""

    def __init__(self, ws: WebSocket, scene: Scene, resolution: int):
        self.ws = ws
        self.state = new_session(scene)
        self.resolution = resolution
        self.last_seq: int | None = None
        self._dirty: bool = False
        self._pump: asyncio.Task | None = None

    def mark_mesh_dirty(self) -> None:
        self._dirty = True
        if self._pump is None or self._pump.done():
            self._pump = asyncio.create_task(self._pump_meshes())

    async def _pump_meshes(self) -> None:
        while self._dirty:
            self._dirty = False
            scene, resolution, seq = self.state.scene, self.resolution, self.last_seq
            try:
                frame = await asyncio.to_thread(_mesh_frame, scene, resolution, seq)
                await self.ws.send_json(frame)
            except (WebSocketDisconnect, RuntimeError):
                return
            except Exception:
                log.exception("mesh push failed")
                return

    async def close_pump(self) -> None:
        if self._pump is not None:
            self._pump.cancel()
            try:
                await self._pump
            except (asyncio.CancelledError, Exception):
                pass


def create_app(scene: Scene, resolution: int = DEFAULT_RESOLUTION, static_dir: str | None = None) -> FastAPI:
    """Service over one initial scene; each connection gets its own
    session (and may load_scene a different document)."""
    app = FastAPI(title="midair session service")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        conn = _Connection(ws, scene, resolution)
        # connection bootstrap: current state and a first mesh
        await ws.send_json({"state": _state_payload(conn.state), "seq": None})
        conn.mark_mesh_dirty()
        try:
            while True:
                message = await ws.receive()
                if message["type"] == "websocket.disconnect":
                    break
                try:
                    raw = json.loads(message.get("text", ""))
                except ValueError:
                    # binary or undecodable text: reject, keep the session
                    await ws.send_json(
                        {"error": {"code": "bad_frame", "message": "frame must be JSON text"}, "seq": None}
                    )
                    continue
                await _handle_frame(conn, raw)
        except WebSocketDisconnect:
            pass
        finally:
            await conn.close_pump()

    async def _handle_frame(conn: _Connection, raw: object) -> None:
        seq = None
        if isinstance(raw, dict):
            seq = raw.get("seq")
            if seq is not None and not isinstance(seq, int):
                await conn.ws.send_json({"error": {"code": "bad_seq", "message": "seq must be an integer"}, "seq": None})
                return
        if not isinstance(raw, dict) or len(set(raw.keys()) - {"seq"}) != 1:
            await conn.ws.send_json(
                {"error": {"code": "bad_frame", "message": "frame must carry exactly one action key"}, "seq": seq}
            )
            return
        key = next(iter(set(raw.keys()) - {"seq"}))
        value = raw[key]
        conn.last_seq = seq

        if key == "event":
            try:
                event = event_from_json(value)
            except (ValueError, TypeError) as exc:
                await conn.ws.send_json({"error": {"code": "bad_event", "message": str(exc)}, "seq": seq})
                return
            conn.state, effects = step(conn.state, event)
            if effects:
                await conn.ws.send_json({"effects": [e.render() for e in effects], "seq": seq})
            await conn.ws.send_json({"state": _state_payload(conn.state), "seq": seq})
            if any(isinstance(e, (SceneEdited, OperatorChanged)) for e in effects):
                conn.mark_mesh_dirty()
            return

        if key == "load_scene":
            try:
                new_scene = parse_scene(value if isinstance(value, str) else json.dumps(value))
            except (SceneSyntaxError, SchemaError, ValueError) as exc:
                await conn.ws.send_json({"error": {"code": "bad_scene", "message": str(exc)}, "seq": seq})
                return
            conn.state = new_session(new_scene)
            await conn.ws.send_json({"state": _state_payload(conn.state), "seq": seq})
            conn.mark_mesh_dirty()
            return

        if key == "request_mesh":
            if not (isinstance(value, dict) and isinstance(value.get("resolution"), int)):
                await conn.ws.send_json(
                    {"error": {"code": "bad_request", "message": "request_mesh needs integer resolution"}, "seq": seq}
                )
                return
            lo, hi = RESOLUTION_RANGE
            res = value["resolution"]
            if not (lo <= res <= hi):
                await conn.ws.send_json(
                    {"error": {"code": "bad_request", "message": f"resolution out of range [{lo}, {hi}]"}, "seq": seq}
                )
                return
            conn.resolution = res
            conn.mark_mesh_dirty()
            return

        await conn.ws.send_json({"error": {"code": "bad_frame", "message": f"unknown action {key!r}"}, "seq": seq})

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


def serve(scene: Scene, host: str, port: int, resolution: int = DEFAULT_RESOLUTION, static_dir: str | None = None) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    if static_dir is None:
        default_static = Path("frontend") / "dist"
        static_dir = str(default_static) if default_static.is_dir() else None
    app = create_app(scene, resolution=resolution, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
