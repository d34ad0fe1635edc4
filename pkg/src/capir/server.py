"""Session server: JSON wire protocol over HTTP for live human play.

Message bodies follow a fixed schema so any client language can speak it:

  create-request  {"level_id": str, "seed": optional int}
  snapshot        {"session_id", "seed", "grid": {"width", "height",
                   "walls": [[x, y], ...]}, "human": [x, y],
                   "assistant": [x, y], "ghosts": [{"pos": [x, y],
                   "alive": bool}, ...], "belief": [...], "step", "status"}
  act-request     {"session_id": str, "action": "N|S|E|W|STAY|SHOOT"}
  act-response    {"assistant_action", "state": snapshot,
                   "events": [{"kind": "kill", "ghost": int}, ...],
                   "diagnostics": {"belief", "likelihoods", "latency_ms"}}
  error           {"code": str, "message": str}

``belief`` and ``likelihoods`` run over live subtasks in ascending ghost
index. Each session's acts are serialized: overlapping acts get a conflict
error rather than interleaved state. Bodies are canonical JSON (sorted
keys, no whitespace) so recorded sessions are byte-stable.
"""

from __future__ import annotations

import itertools
import threading

from fastapi import FastAPI, Request, Response

from .dynamics import HUMAN_ACTIONS
from .level import LevelError, bundled_level_names, load_level, resolve_level_path
from .mdp import canonical_json
from .planner import CacheError, default_cache_path, load_cache
from .session import GameSession, IllegalActionError, SessionFinishedError

__all__ = ["create_app"]


def _json_response(payload, status_code=200) -> Response:
    return Response(content=canonical_json(payload), media_type="application/json", status_code=status_code)


def _error(status, code, message) -> Response:
    return _json_response({"code": code, "message": message}, status_code=status)


class _SessionBox:
    """A session plus its act lock; acts must never interleave."""

    def __init__(self, session_id, session, level):
        self.session_id = session_id
        self.session = session
        self.level = level
        self.lock = threading.Lock()

    def snapshot(self):
        sess, grid = self.session, self.level.grid
        world = sess.world
        return {
            "session_id": self.session_id,
            "seed": sess.seed,
            "grid": {"width": grid.width, "height": grid.height, "walls": grid.walls()},
            "human": list(grid.xy(world.human_pos)),
            "assistant": list(grid.xy(world.assistant_pos)),
            "ghosts": [{"pos": list(grid.xy(pos)), "alive": bool(alive)} for pos, alive in world.ghosts],
            "belief": [float(b) for b in sess.tracker.belief],
            "step": sess.step_count,
            "status": sess.status,
        }


def create_app(allow_nonconverged: bool = False, static_dir=None) -> FastAPI:
    """Build the session server app. Levels are resolved by name through
    CAPIR_LEVEL_DIR / the bundled directory; caches are expected next to
    their level file (run ``capir plan`` first)."""
    app = FastAPI(title="capir session server")
    sessions: dict[str, _SessionBox] = {}
    counter = itertools.count(1)
    create_lock = threading.Lock()

    @app.get("/levels")
    def levels() -> Response:
        return _json_response({"levels": bundled_level_names()})

    @app.post("/sessions")
    async def create_session(request: Request) -> Response:
        body = await request.json()
        level_id = body.get("level_id")
        if not isinstance(level_id, str):
            return _error(400, "bad-request", "create-request needs a string level_id")
        seed = body.get("seed", 0)
        if not isinstance(seed, int):
            return _error(400, "bad-request", "seed must be an integer")
        try:
            path = resolve_level_path(level_id)
            level = load_level(level_id)
        except LevelError as exc:
            return _error(404, "unknown-level", str(exc))
        cache_path = default_cache_path(path)
        if not cache_path.is_file():
            return _error(409, "missing-cache", f"no policy cache at {cache_path}; run: capir plan --level {path}")
        try:
            cache = load_cache(cache_path, level)
            session = GameSession(level, cache, seed=seed, allow_nonconverged=allow_nonconverged)
        except CacheError as exc:
            return _error(409, "stale-cache", f"{exc}")
        with create_lock:
            session_id = f"s{next(counter):06d}"
            box = _SessionBox(session_id, session, level)
            sessions[session_id] = box
        return _json_response(box.snapshot())

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> Response:
        box = sessions.get(session_id)
        if box is None:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        return _json_response(box.snapshot())

    @app.post("/act")
    async def act(request: Request) -> Response:
        body = await request.json()
        box = sessions.get(body.get("session_id"))
        if box is None:
            return _error(404, "unknown-session", f"no session {body.get('session_id')!r}")
        action = body.get("action")
        if action not in HUMAN_ACTIONS:
            return _error(400, "illegal-action", f"action must be one of {list(HUMAN_ACTIONS)}, got {action!r}")
        if not box.lock.acquire(blocking=False):
            return _error(409, "act-in-flight", "another act for this session is still being processed")
        try:
            try:
                result = box.session.apply_human_action(action)
            except SessionFinishedError as exc:
                return _error(409, "session-finished", str(exc))
            except IllegalActionError as exc:  # defense; names were checked above
                return _error(400, "illegal-action", str(exc))
            return _json_response(
                {
                    "assistant_action": result.assistant_action,
                    "state": box.snapshot(),
                    "events": [{"kind": "kill", "ghost": g} for g in result.kills],
                    "diagnostics": {
                        "belief": [float(b) for b in result.diagnostics["belief"]],
                        "likelihoods": [float(x) for x in result.diagnostics["likelihoods"]],
                        "latency_ms": result.latency_ms,
                    },
                }
            )
        finally:
            box.lock.release()

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="client")

    return app
