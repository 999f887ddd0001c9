"""HTTP process boundary: chat sessions over JSON, with per-stage timings.

Endpoints: POST /sessions, POST /sessions/{id}/messages,
GET /sessions/{id}/transcript, GET /health.  Per session, one turn at a
time: a second concurrent message is rejected with 409, not queued.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from .engine import AdvisorEngine, TurnOutcome
from .solver import SolverConfig
from .speech import DialogueSession, SessionState
from .store import KnowledgeStore


class SolverOverrides(BaseModel):
    model_config = ConfigDict(extra="forbid")
    max_dishes: Optional[int] = None
    threshold: Optional[float] = None
    max_solutions: Optional[int] = None


class SessionCreateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    transparency: Optional[bool] = None
    replan_cap: Optional[int] = None
    solver: Optional[SolverOverrides] = None


class MessageRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    text: str


class NoteModel(BaseModel):
    stage: str
    text: str


class TimingModel(BaseModel):
    stage: str
    seconds: float


class TurnRecordModel(BaseModel):
    session_id: str
    turn_index: int
    utterance: str
    reply: str
    intent_kind: str
    awaiting_clarification: bool
    disclosed_notes: list[NoteModel]
    timings: list[TimingModel]
    plans: list[dict]


@dataclass
class SessionEntry:
    session: DialogueSession
    engine: AdvisorEngine
    lock: threading.Lock = field(default_factory=threading.Lock)
    records: list[TurnRecordModel] = field(default_factory=list)


def _record_from_outcome(session: DialogueSession, utterance: str,
                         outcome: TurnOutcome) -> TurnRecordModel:
    return TurnRecordModel(
        session_id=session.session_id,
        turn_index=session.turn_index,
        utterance=utterance,
        reply=outcome.reply_text,
        intent_kind=outcome.intent_kind,
        awaiting_clarification=outcome.awaiting_clarification,
        disclosed_notes=[NoteModel(stage=n.stage.label, text=n.text)
                         for n in outcome.disclosed_notes],
        timings=[TimingModel(stage=t.stage.value, seconds=t.elapsed)
                 for t in outcome.timings],
        plans=outcome.plans,
    )


class AdvisorService:
    """Session registry plus turn execution over a shared engine."""

    def __init__(self, engine: AdvisorEngine, transcript_log: Optional[str] = None):
        self.engine = engine
        self.transcript_log = transcript_log
        self._sessions: dict[str, SessionEntry] = {}
        self._registry_lock = threading.Lock()

    def create_session(self, request: SessionCreateRequest) -> str:
        if request.replan_cap is not None and request.replan_cap < 1:
            raise HTTPException(status_code=400, detail="replan_cap must be >= 1")
        engine = self.engine
        if request.solver is not None:
            overrides = {k: v for k, v in request.solver.model_dump().items()
                         if v is not None}
            if "threshold" in overrides:
                overrides["threshold"] = Fraction(
                    Decimal(str(overrides["threshold"])))
            try:
                config = SolverConfig(**{**_config_dict(engine.solver_config),
                                         **overrides})
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            engine = AdvisorEngine(
                self.engine.store, intent_backend=self.engine.intent_backend,
                speech_backend=self.engine.speech_backend, solver_config=config,
                replan_cap=self.engine.replan_cap,
                transparency=self.engine.transparency, locale=self.engine.locale)
        session = engine.create_session(transparency=request.transparency,
                                        replan_cap=request.replan_cap)
        with self._registry_lock:
            self._sessions[session.session_id] = SessionEntry(session, engine)
        return session.session_id

    def _entry(self, session_id: str) -> SessionEntry:
        entry = self._sessions.get(session_id)
        if entry is None or entry.session.state is SessionState.CLOSED:
            raise HTTPException(status_code=404, detail="unknown or closed session")
        return entry

    def post_message(self, session_id: str, text: str) -> TurnRecordModel:
        entry = self._entry(session_id)
        if not text.strip():
            raise HTTPException(status_code=422, detail="message text is empty")
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a turn is already in flight")
        try:
            outcome = entry.engine.run_turn(text, entry.session)
            record = _record_from_outcome(entry.session, text, outcome)
            entry.records.append(record)
            if self.transcript_log:
                with open(self.transcript_log, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.model_dump()) + "\n")
            return record
        finally:
            entry.lock.release()

    def transcript(self, session_id: str) -> list[TurnRecordModel]:
        return list(self._entry(session_id).records)


def _config_dict(config: SolverConfig) -> dict:
    return {"max_dishes": config.max_dishes, "threshold": config.threshold,
            "max_solutions": config.max_solutions, "group_bins": config.group_bins}


def engine_from_env() -> AdvisorEngine:
    snapshot = os.environ.get("DIET_ADVISOR_SNAPSHOT", "")
    store = KnowledgeStore.load_snapshot(snapshot) if snapshot else KnowledgeStore()
    backend_name = os.environ.get("DIET_ADVISOR_BACKEND", "deterministic")
    intent_backend = None
    speech_backend = None
    if backend_name == "remote":
        from .llm import ChatCompletionClient, RemoteIntentBackend, RemoteSpeechBackend
        client = ChatCompletionClient()
        intent_backend = RemoteIntentBackend(client)
        speech_backend = RemoteSpeechBackend(client)
    replan_cap = int(os.environ.get("DIET_ADVISOR_REPLAN_CAP", "3"))
    config = SolverConfig(
        max_dishes=int(os.environ.get("DIET_ADVISOR_MAX_DISHES", "3")),
        threshold=Fraction(Decimal(os.environ.get("DIET_ADVISOR_THRESHOLD", "0.10"))),
        max_solutions=int(os.environ.get("DIET_ADVISOR_MAX_SOLUTIONS", "5")),
    )
    return AdvisorEngine(store, intent_backend=intent_backend,
                         speech_backend=speech_backend, solver_config=config,
                         replan_cap=replan_cap)


def create_app(engine: Optional[AdvisorEngine] = None,
               transcript_log: Optional[str] = None) -> FastAPI:
    engine = engine or engine_from_env()
    transcript_log = transcript_log or os.environ.get("DIET_ADVISOR_TRANSCRIPT_LOG")
    service = AdvisorService(engine, transcript_log)
    app = FastAPI(title="diet-advisor", version="0.1.0")
    app.state.service = service

    @app.get("/health")
    def health():
        return {"status": "ok",
                "dishes": len(engine.store.all_dishes()),
                "users": len(engine.store.all_users())}

    @app.post("/sessions", status_code=201)
    def create_session(request: SessionCreateRequest) -> dict:
        return {"session_id": service.create_session(request)}

    @app.post("/sessions/{session_id}/messages", response_model=TurnRecordModel)
    def post_message(session_id: str, request: MessageRequest):
        return service.post_message(session_id, request.text)

    @app.get("/sessions/{session_id}/transcript",
             response_model=list[TurnRecordModel])
    def transcript(session_id: str):
        return service.transcript(session_id)

    return app
