"""Session service: scene editing over a message protocol with live re-solves.

Inbound message kinds (JSON objects with a "kind" field):
  - load_scene  {"scene": <scene document>} — replaces the session scene,
    resets the revision to 1 and replies with the solved layout
  - apply_delta {"delta": <delta document>, "client_revision": int} — applies
    one scene edit; rejected with code "stale_revision" unless
    client_revision equals the current revision; accepted edits increment it
  - set_weights {"weights": <weights document>} — replaces the constraint
    weights (omitted keys revert to defaults) and increments the revision
  - request_solve {} — re-solves the current scene without mutating it

Every inbound message gets exactly one reply: either
  layout(revision, positions, total_cost, per_kind_cost, iterations, elapsed_ms)
or
  error(code, message, field_path?)   codes: bad_request, stale_revision,
                                      no_session, no_scene, numeric

Bursts are coalesced: `handle_batch` applies all mutations in arrival order
but runs a single solve for the final geometry, so consecutive drag deltas
cost one solve. Each accepted message is answered with that final layout;
the revision it carries is the state the positions reflect.
"""
from __future__ import annotations

import asyncio
import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Any

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .scene import (
    Scene,
    SceneError,
    SceneParseError,
    SceneValidationError,
    _parse_weights,
    apply_delta,
    delta_from_dict,
    scene_from_dict,
    validate_scene,
)
from .solver import SolveResult, WarmStartState, solve

_INBOUND_KEYS = {
    "load_scene": {"scene"},
    "apply_delta": {"delta", "client_revision"},
    "set_weights": {"weights"},
    "request_solve": set(),
}


def _error(code: str, message: str, field_path: str | None = None) -> dict[str, Any]:
    reply: dict[str, Any] = {"kind": "error", "code": code, "message": message}
    if field_path is not None:
        reply["field_path"] = field_path
    return reply


def _field_path(exc: SceneError) -> str | None:
    if isinstance(exc, SceneParseError):
        return exc.path
    if isinstance(exc, SceneValidationError) and exc.violations:
        return exc.violations[0].path
    return None


class _Rejected(Exception):
    def __init__(self, reply: dict[str, Any]) -> None:
        self.reply = reply


@dataclass
class SessionState:
    """One client's scene, warm-start cache and revision counter."""

    scene: Scene | None = None
    warm: WarmStartState = field(default_factory=WarmStartState)
    revision: int = 0

    def handle_message(self, message: Any) -> dict[str, Any]:
        return self.handle_batch([message])[0]

    def handle_batch(self, messages: list[Any]) -> list[dict[str, Any]]:
        """Replies for `messages`, in order, with solve work coalesced.

        Mutations are applied immediately in arrival order; one solve of the
        resulting scene answers every message that asked for layout.
        """
        replies: list[dict[str, Any] | None] = []
        for message in messages:
            try:
                self._apply(message)
                replies.append(None)  # filled with the coalesced layout below
            except _Rejected as rejection:
                replies.append(rejection.reply)

        if any(reply is None for reply in replies):
            layout = self._solve_reply()
            replies = [layout if reply is None else reply for reply in replies]
        return replies

    # --- one accepted message → state change; rejection raises _Rejected

    def _apply(self, message: Any) -> None:
        if not isinstance(message, dict) or "kind" not in message:
            raise _Rejected(_error("bad_request", 'message must be an object with a "kind" field'))
        kind = message["kind"]
        expected = _INBOUND_KEYS.get(kind)
        if expected is None:
            raise _Rejected(_error("bad_request", f"unknown message kind {kind!r}"))
        extra = set(message) - expected - {"kind"}
        missing = expected - set(message)
        if extra or missing:
            detail = []
            if missing:
                detail.append(f"missing {sorted(missing)}")
            if extra:
                detail.append(f"unexpected {sorted(extra)}")
            raise _Rejected(_error("bad_request", f"{kind}: {', '.join(detail)}"))

        if kind == "load_scene":
            try:
                scene = scene_from_dict(message["scene"])
                violations = validate_scene(scene)
                if violations:
                    raise SceneValidationError(violations)
            except SceneError as exc:
                inner = _field_path(exc)
                path = f"scene.{inner}" if inner else "scene"
                raise _Rejected(_error("bad_request", str(exc), path)) from exc
            self.scene = scene
            self.warm = WarmStartState()
            self.revision = 1
            return

        if self.scene is None:
            raise _Rejected(_error("no_scene", "load a scene before sending edits"))

        if kind == "apply_delta":
            client_revision = message["client_revision"]
            if not isinstance(client_revision, int) or isinstance(client_revision, bool):
                raise _Rejected(_error("bad_request", "client_revision must be an integer"))
            if client_revision != self.revision:
                raise _Rejected(
                    _error(
                        "stale_revision",
                        f"client_revision {client_revision} does not match server revision {self.revision}",
                    )
                )
            try:
                delta = delta_from_dict(message["delta"])
                self.scene = apply_delta(self.scene, delta)
            except SceneError as exc:
                raise _Rejected(_error("bad_request", str(exc), _field_path(exc))) from exc
            self.revision += 1
            return

        if kind == "set_weights":
            try:
                weights = _parse_weights(message["weights"])
                candidate = replace(self.scene, weights=weights)
                violations = validate_scene(candidate)
                if violations:
                    raise SceneValidationError(violations)
            except SceneError as exc:
                raise _Rejected(_error("bad_request", str(exc), _field_path(exc))) from exc
            self.scene = candidate
            self.revision += 1
        # request_solve: no mutation, reply is simply the next layout

    def _solve_reply(self) -> dict[str, Any]:
        assert self.scene is not None
        try:
            result = solve(self.scene, warm=self.warm)
        except Exception as exc:  # pragma: no cover - defensive: singular systems
            return _error("numeric", f"solver failed: {exc}")
        self.warm.absorb(self.scene, result)
        return _layout_reply(self.revision, result)


def _layout_reply(revision: int, result: SolveResult) -> dict[str, Any]:
    return {
        "kind": "layout",
        "revision": revision,
        "positions": {
            decal_id: [float(x), float(y)] for decal_id, (x, y) in zip(result.ids, result.positions)
        },
        "total_cost": result.total_cost,
        "per_kind_cost": result.per_kind_cost,
        "iterations": result.iterations,
        "elapsed_ms": result.elapsed_ms,
    }


class SessionManager:
    """Open/close isolated sessions addressed by opaque ids."""

    def __init__(self) -> None:
        self._sessions: dict[str, SessionState] = {}
        self._counter = itertools.count(1)

    def open(self) -> str:
        session_id = f"s{next(self._counter)}"
        self._sessions[session_id] = SessionState()
        return session_id

    def get(self, session_id: str) -> SessionState | None:
        return self._sessions.get(session_id)

    def close(self, session_id: str) -> bool:
        return self._sessions.pop(session_id, None) is not None


def one_shot_solve(scene_doc: Any) -> dict[str, Any]:
    """Load + solve in one call; the non-interactive entry point."""
    session = SessionState()
    return session.handle_message({"kind": "load_scene", "scene": scene_doc})


def create_app(manager: SessionManager | None = None):
    """The HTTP/WebSocket transport around `SessionManager`.

    Endpoints: POST /sessions (open), DELETE /sessions/{id} (close),
    WS /sessions/{id}/ws (message stream for an opened session),
    WS /session (auto-opened session for the connection's lifetime),
    POST /solve (one-shot load+solve).
    """
    app = FastAPI(title="freeform-layout service")
    sessions = manager if manager is not None else SessionManager()

    @app.post("/sessions")
    def open_session() -> dict[str, str]:
        return {"session": sessions.open()}

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        if not sessions.close(session_id):
            return JSONResponse(_error("no_session", f"unknown session {session_id!r}"), status_code=404)
        return {"closed": session_id}

    @app.post("/solve")
    def solve_once(body: dict):
        if not isinstance(body, dict) or set(body) != {"scene"}:
            return JSONResponse(_error("bad_request", 'body must be {"scene": …}'), status_code=400)
        reply = one_shot_solve(body["scene"])
        status = 200 if reply["kind"] == "layout" else 400
        return JSONResponse(reply, status_code=status)

    async def _pump(ws: WebSocket, session: SessionState) -> None:
        """Receive frames, batching whatever queued while solving."""
        pending = asyncio.ensure_future(ws.receive_text())
        try:
            while True:
                batch = [await pending]
                while True:
                    pending = asyncio.ensure_future(ws.receive_text())
                    done, _ = await asyncio.wait({pending}, timeout=0)
                    if pending in done:
                        batch.append(pending.result())
                    else:
                        break
                messages = []
                parse_failures: dict[int, dict[str, Any]] = {}
                for i, frame in enumerate(batch):
                    try:
                        messages.append(json.loads(frame))
                    except json.JSONDecodeError as exc:
                        parse_failures[i] = _error("bad_request", f"invalid JSON frame: {exc}")
                        messages.append(None)
                valid = [m for m in messages if m is not None]
                replies = await asyncio.to_thread(session.handle_batch, valid) if valid else []
                out = iter(replies)
                for i in range(len(batch)):
                    reply = parse_failures.get(i, None)
                    await ws.send_text(json.dumps(reply if reply is not None else next(out)))
        finally:
            pending.cancel()

    @app.websocket("/session")
    async def session_socket(ws: WebSocket) -> None:
        await ws.accept()
        session = SessionState()
        try:
            await _pump(ws, session)
        except WebSocketDisconnect:
            pass

    @app.websocket("/sessions/{session_id}/ws")
    async def named_session_socket(ws: WebSocket, session_id: str) -> None:
        await ws.accept()
        session = sessions.get(session_id)
        if session is None:
            await ws.send_text(json.dumps(_error("no_session", f"unknown session {session_id!r}")))
            await ws.close()
            return
        try:
            await _pump(ws, session)
        except WebSocketDisconnect:
            pass

    return app
