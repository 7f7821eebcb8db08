"""JSON-over-HTTP facade over the game engine for the companion UI.

Sessions live in an in-memory store (optionally snapshotted to disk as JSON)
and are mutated only through the engine; views carry rendered formulas and
the full legal-move menu so clients need no game-rule logic of their own.
Requests to one session are serialised; distinct sessions run concurrently.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from atlgts.cgm import LazyModel, Model, ModelError, lazy_model, model_from_dict
from atlgts.embedded_solver import render_label
from atlgts.formula import FormulaSyntaxError, parse_formula, print_formula
from atlgts.game_engine import (
    DEFAULT_STEP_BUDGET,
    Bounded,
    FinitelyBounded,
    IllegalMove,
    Mode,
    Session,
    SessionError,
    Unbounded,
    make_script,
    new_session,
    run_machine,
)
from atlgts.ordinal import OrdinalError, parse_ordinal


class BadRequest(ValueError):
    def __init__(self, errors):
        self.errors = errors if isinstance(errors, list) else [str(errors)]
        super().__init__("; ".join(self.errors))


@dataclass
class SessionRecord:
    id: str
    session: Session
    created_at: float
    setup: dict
    applied_moves: list = field(default_factory=list)
    version: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe registry; optional JSON snapshots for restart survival."""

    def __init__(self, persist_dir: Optional[str] = None):
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_snapshots()

    def create(self, setup: dict) -> SessionRecord:
        session = build_session(setup)
        record = SessionRecord(
            id=secrets.token_hex(8),
            session=session,
            created_at=time.time(),
            setup=setup,
        )
        with self._lock:
            self._records[record.id] = record
        self._snapshot(record)
        return record

    def get(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._records.get(session_id)
        if record is None:
            raise KeyError(session_id)
        return record

    def _snapshot(self, record: SessionRecord) -> None:
        if not self.persist_dir:
            return
        payload = {
            "id": record.id,
            "createdAt": record.created_at,
            "setup": record.setup,
            "moves": record.applied_moves,
            "version": record.version,
        }
        path = self.persist_dir / f"{record.id}.json"
        path.write_text(json.dumps(payload, indent=2))

    def _load_snapshots(self) -> None:
        for path in sorted(self.persist_dir.glob("*.json")):
            try:
                payload = json.loads(path.read_text())
                session = build_session(payload["setup"])
                for entry in payload["moves"]:
                    if entry["type"] == "move":
                        session.apply_move(entry["actor"], entry["move"])
                    else:
                        run_machine(session, entry.get("budget", DEFAULT_STEP_BUDGET))
                record = SessionRecord(
                    id=payload["id"],
                    session=session,
                    created_at=payload.get("createdAt", 0.0),
                    setup=payload["setup"],
                    applied_moves=payload["moves"],
                    version=payload.get("version", len(payload["moves"])),
                )
                self._records[record.id] = record
            except Exception:
                continue  # a bad snapshot should not block startup

    def note_mutation(self, record: SessionRecord, entry: dict) -> None:
        record.applied_moves.append(entry)
        record.version += 1
        self._snapshot(record)


def _parse_mode(raw: object) -> Mode:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise BadRequest("mode must be an object with a 'kind'")
    kind = raw["kind"]
    if kind == "unbounded":
        return Unbounded()
    if kind == "finitely-bounded":
        return FinitelyBounded()
    if kind == "bounded":
        gamma_text = raw.get("gammaBound", "auto")
        if gamma_text in (None, "auto"):
            return Bounded(None)
        try:
            return Bounded(parse_ordinal(str(gamma_text)))
        except OrdinalError as exc:
            raise BadRequest(f"bad gammaBound: {exc}") from None
    raise BadRequest(f"unknown mode kind {kind!r}")


def build_session(setup: dict) -> Session:
    errors: list[str] = []
    if not isinstance(setup, dict):
        raise BadRequest("body must be a JSON object")
    model: Model | LazyModel | None = None
    if "model" in setup and "lazyModel" in setup:
        errors.append("give either 'model' or 'lazyModel', not both")
    elif "model" in setup:
        try:
            model = model_from_dict(setup["model"])
        except ModelError as exc:
            errors.extend(exc.errors)
    elif "lazyModel" in setup:
        try:
            model = lazy_model(str(setup["lazyModel"]))
        except ValueError as exc:
            errors.append(str(exc))
    else:
        errors.append("missing 'model' or 'lazyModel'")

    formula = None
    try:
        formula = parse_formula(str(setup.get("formula", "")))
    except FormulaSyntaxError as exc:
        errors.append(f"formula: {exc} (offset {exc.offset})")

    mode = None
    try:
        mode = _parse_mode(setup.get("mode"))
    except BadRequest as exc:
        errors.extend(exc.errors)

    roles = setup.get("roles")
    if not isinstance(roles, dict) or set(roles) != {"E", "A"}:
        errors.append("roles must map exactly E and A")
        roles = {"E": "human", "A": "human"}

    scripts = {}
    raw_scripts = setup.get("scripts") or {}
    if not isinstance(raw_scripts, dict):
        errors.append("scripts must be an object keyed by player")
        raw_scripts = {}
    for player, entry in raw_scripts.items():
        if player not in ("E", "A") or not isinstance(entry, dict):
            errors.append(f"bad script entry for {player!r}")
            continue
        try:
            scripts[player] = make_script(
                str(entry.get("name", "")), entry.get("n")
            )
        except ValueError as exc:
            errors.append(str(exc))

    state = setup.get("state")
    if not isinstance(state, str):
        errors.append("missing 'state'")
    if errors:
        raise BadRequest(errors)
    try:
        return new_session(model, state, formula, mode, roles, scripts=scripts)
    except (SessionError, ValueError) as exc:
        raise BadRequest(str(exc)) from None


def session_view(record: SessionRecord) -> dict:
    session = record.session
    actor = session.pending_actor()
    human_pending = actor is not None and session.roles[actor] == "human"
    view = {
        "id": record.id,
        "version": record.version,
        "phase": session.phase,
        "state": session.state,
        "limit": None if session.limit is None else str(session.limit),
        "announced": None if session.announced is None else str(session.announced),
        "gammaBound": None if session.gamma_bound is None else str(session.gamma_bound),
        "modelKind": "lazy" if session.is_lazy else "finite",
        "rootFormula": print_formula(session.root),
        "activeFormula": print_formula(session.formula())
        if not session.ended()
        else None,
        "verifier": session.verifier,
        "pendingActor": actor,
        "machinePending": session.machine_pending(),
        "legalMoves": session.legal_moves() if human_pending else None,
        "winner": session.winner,
        "reason": session.reason,
        "roles": session.roles,
        "transcriptLength": len(session.transcript),
    }
    if not session.is_lazy:
        view["states"] = list(session.model.states)
    if session.emb is not None:
        view["embedded"] = {
            "formula": print_formula(session.subs[session.emb.formula_i]),
            "verifier": session.emb.verifier,
            "controller": session.emb.controller,
            "coalition": list(session.emb.coalition),
        }
    else:
        view["embedded"] = None
    return view


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="atlgts session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store or SessionStore()

    def _store() -> SessionStore:
        return app.state.store

    @app.exception_handler(BadRequest)
    async def bad_request_handler(_request: Request, exc: BadRequest):
        return JSONResponse(status_code=400, content={"errors": exc.errors})

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise BadRequest(f"invalid JSON: {exc}") from None
        record = _store().create(body)
        if request.query_params.get("autoReply", "true") != "false":
            _auto_reply(record)
        return {"id": record.id, "view": session_view(record)}

    def _auto_reply(record: SessionRecord, budget: int = DEFAULT_STEP_BUDGET) -> None:
        if record.session.machine_pending():
            run_machine(record.session, budget)
            _store().note_mutation(record, {"type": "machine", "budget": budget})

    @app.post("/sessions/{session_id}/moves")
    async def post_move(
        session_id: str, request: Request, autoReply: bool = Query(True)
    ):
        store = _store()
        try:
            record = store.get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise BadRequest(f"invalid JSON: {exc}") from None
        if not isinstance(body, dict):
            raise BadRequest("body must be a JSON object")
        actor = body.get("actor")
        move = body.get("move")
        version = body.get("version")
        with record.lock:
            if version is not None and version != record.version:
                return JSONResponse(
                    status_code=409,
                    content={
                        "error": f"stale version {version}, current {record.version}",
                        "view": session_view(record),
                    },
                )
            session = record.session
            if actor not in ("E", "A") or session.roles.get(actor) != "human":
                return JSONResponse(
                    status_code=409,
                    content={"error": f"{actor!r} is not a human player"},
                )
            try:
                session.apply_move(actor, move)
            except (IllegalMove, SessionError) as exc:
                menu = None
                if not session.ended():
                    menu = session.legal_moves()
                return JSONResponse(
                    status_code=409,
                    content={"error": str(exc), "legalMoves": menu},
                )
            store.note_mutation(
                record, {"type": "move", "actor": actor, "move": move}
            )
            if autoReply:
                _auto_reply(record)
            return session_view(record)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        try:
            record = _store().get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        return session_view(record)

    @app.get("/sessions/{session_id}/transcript")
    async def get_transcript(session_id: str):
        try:
            record = _store().get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        return record.session.transcript_json()

    @app.get("/sessions/{session_id}/labels")
    async def get_labels(session_id: str):
        try:
            record = _store().get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session = record.session
        if session.is_lazy:
            return JSONResponse(
                status_code=422,
                content={"error": "labels are only available on finite models"},
            )
        context_i = session.label_context()
        if context_i is None:
            return JSONResponse(
                status_code=422,
                content={"error": "no strategic context to label"},
            )
        cmap, omap, spec = session.solver().labels_for_context(session, context_i)
        per_player = {
            cmap.player: {q: render_label(cmap.label(q)) for q in session.model.states},
            omap.player: {q: render_label(omap.label(q)) for q in session.model.states},
        }
        return {
            "contextFormula": print_formula(session.subs[context_i]),
            "gamma": str(cmap.gamma),
            "controller": spec.controller,
            "perPlayer": per_player,
        }

    return app
