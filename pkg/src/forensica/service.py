"""Session host: the browser client plays over HTTP + WebSocket.

Sessions live in memory. Commands for one session are applied under a
per-session lock, strictly in arrival order; distinct sessions are
independent. Responses carry visible-tile diffs; a ``resync`` command
returns the full view for recovery. Idle sessions expire after a TTL
that is advertised in the create response.
"""

from __future__ import annotations

import secrets
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .config import GenConfig
from .errors import GenerationError
from .evidence import RadioMessage
from .session import (
    FateReport,
    GameSession,
    IllegalStateError,
    OutOfReachError,
    Phase,
    ReportEntry,
)
from .wire import serialize_world, strip_ground_truth, to_bundle
from .worldgen import generate_station, generate_village

DEFAULT_TTL_SECONDS = 1800


class CreateRequest(BaseModel):
    game: str
    seed: int | None = None


class CommandRequest(BaseModel):
    cmd: str
    direction: str | None = None
    x: int | None = None
    y: int | None = None
    entries: dict[str, dict[str, str]] | None = None


@dataclass
class SessionBox:
    session: GameSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    expires_at: float = 0.0
    last_visible: set[tuple[int, int]] = field(default_factory=set)


def _public_message(msg: RadioMessage) -> dict:
    return {
        "sender": msg.sender_name,
        "timestamp": msg.timestamp,
        "kind": msg.kind.value,
        "body": msg.body,
        "reply": msg.optional_reply,
    }


def _tile_payload(session: GameSession, tiles) -> list[dict]:
    world = session.world
    return [
        {
            "x": x,
            "y": y,
            "terrain": world.terrain(x, y),
            "objects": [
                {"kind": e.kind, "blocking": e.blocking}
                for e in world.objects_at(x, y)
            ],
        }
        for x, y in sorted(tiles)
    ]


def _diff(box: SessionBox) -> dict:
    session = box.session
    visible = session.visible_tiles()
    added = visible - box.last_visible
    removed = box.last_visible - visible
    box.last_visible = visible
    return {
        "player": list(session.player_pos),
        "facing": list(session.facing),
        "phase": session.phase.value,
        "tiles_added": _tile_payload(session, added),
        "tiles_removed": [list(t) for t in sorted(removed)],
    }


def apply_command(box: SessionBox, cmd: CommandRequest) -> dict:
    session = box.session
    if cmd.cmd == "move":
        if cmd.direction is None:
            raise ValueError("move needs a direction")
        result = session.move(cmd.direction)
        return {"ok": True, "moved": result.moved, "text": result.text,
                "diff": _diff(box)}
    if cmd.cmd == "face":
        if cmd.direction is None:
            raise ValueError("face needs a direction")
        session.face(cmd.direction)
        return {"ok": True, "diff": _diff(box)}
    if cmd.cmd == "inspect":
        if cmd.x is None or cmd.y is None:
            raise ValueError("inspect needs x and y")
        return {"ok": True, "text": session.inspect(cmd.x, cmd.y),
                "diff": _diff(box)}
    if cmd.cmd == "read":
        if cmd.x is None or cmd.y is None:
            raise ValueError("read needs x and y")
        message = session.read_terminal(cmd.x, cmd.y)
        return {"ok": True, "message": _public_message(message),
                "diff": _diff(box)}
    if cmd.cmd == "report":
        report = FateReport(
            entries={
                body_id: ReportEntry(
                    claimed_name=entry.get("name", ""),
                    claimed_cause=entry.get("cause", ""),
                )
                for body_id, entry in (cmd.entries or {}).items()
            }
        )
        result = session.submit_report(report)
        return {"ok": True, "score": result["score"],
                "ground_truth": result["ground_truth"], "diff": _diff(box)}
    if cmd.cmd == "resync":
        box.last_visible = session.visible_tiles()
        return {"ok": True, "view": session.client_view()}
    if cmd.cmd == "quit":
        return {"ok": True, "summary": session.quit_summary()}
    raise ValueError(f"unknown command: {cmd.cmd}")


def create_app(ttl_seconds: int = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="forensica", version="1.0")
    sessions: dict[str, SessionBox] = {}
    registry_lock = threading.Lock()

    def _purge(now: float) -> None:
        for sid in [s for s, b in sessions.items() if b.expires_at < now]:
            sessions.pop(sid, None)

    def _get(session_id: str) -> SessionBox:
        now = time.time()
        with registry_lock:
            _purge(now)
            box = sessions.get(session_id)
            if box is None:
                raise HTTPException(status_code=404, detail="unknown session")
            box.expires_at = now + ttl_seconds
            return box

    @app.get("/health")
    def health() -> dict:
        return {"ok": True, "sessions": len(sessions)}

    @app.post("/session")
    def create_session(req: CreateRequest) -> dict:
        game = req.game.lower()
        if game not in ("village", "station"):
            raise HTTPException(status_code=422, detail="game must be village|station")
        seed = req.seed if req.seed is not None else secrets.randbits(64)
        config = GenConfig()
        try:
            generate = generate_village if game == "village" else generate_station
            artifact = generate(seed, config)
        except GenerationError as exc:
            diagnostic = uuid.uuid4().hex[:8]
            raise HTTPException(
                status_code=500,
                detail=f"generation failed (diagnostic {diagnostic}): {exc}",
            )
        session = GameSession(artifact)
        box = SessionBox(session=session, expires_at=time.time() + ttl_seconds)
        box.last_visible = session.visible_tiles()
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = box
        return {
            "session_id": session_id,
            "seed": seed,
            "game": artifact.game,
            "ttl_seconds": ttl_seconds,
            "view": session.client_view(),
        }

    @app.post("/session/{session_id}/cmd")
    def command(session_id: str, cmd: CommandRequest) -> dict:
        box = _get(session_id)
        with box.lock:
            try:
                return apply_command(box, cmd)
            except IllegalStateError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except (OutOfReachError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/session/{session_id}/export")
    def export(session_id: str) -> dict:
        box = _get(session_id)
        with box.lock:
            bundle = to_bundle(box.session.artifact)
            if box.session.phase is not Phase.SUBMITTED:
                bundle = strip_ground_truth(bundle)
            # Round through canonical bytes so exports are diff-stable.
            import json as _json

            return _json.loads(serialize_world(bundle))

    @app.websocket("/session/{session_id}/live")
    async def live(websocket: WebSocket, session_id: str) -> None:
        await websocket.accept()
        try:
            box = _get(session_id)
        except HTTPException:
            await websocket.send_json({"ok": False, "error": "unknown session"})
            await websocket.close()
            return
        try:
            while True:
                payload = await websocket.receive_json()
                try:
                    cmd = CommandRequest(**payload)
                    with box.lock:
                        response = apply_command(box, cmd)
                except IllegalStateError as exc:
                    response = {"ok": False, "error": str(exc), "code": 409}
                except (OutOfReachError, ValueError) as exc:
                    response = {"ok": False, "error": str(exc), "code": 400}
                await websocket.send_json(response)
        except WebSocketDisconnect:
            return

    return app


app = create_app()
