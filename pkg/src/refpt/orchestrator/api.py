"""HTTP surface for driving sessions; everything the operator console needs."""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from ..errors import (
    BackendUnavailable,
    NoScriptMatch,
    RefptError,
    SchemaViolation,
    WrongPhase,
)
from .config import BackendConfig, SessionConfig
from .session import Session

logger = logging.getLogger(__name__)


@dataclass
class EngineSettings:
    """Server-wide defaults new sessions inherit."""

    store_path: str
    backend: BackendConfig
    flags_total: int = 6
    transcripts_dir: Optional[str] = None
    prompts_dir: Optional[str] = None
    lambda_override: Optional[float] = None


@dataclass
class Engine:
    settings: EngineSettings
    sessions: dict[str, Session] = field(default_factory=dict)

    def create_session(self, flags_total: Optional[int] = None,
                       session_id: Optional[str] = None,
                       lambda_override: Optional[float] = None) -> Session:
        kwargs: dict[str, Any] = {
            "store_path": self.settings.store_path,
            "flags_total": flags_total or self.settings.flags_total,
            "backend": self.settings.backend,
            "lambda_override": (lambda_override
                                if lambda_override is not None
                                else self.settings.lambda_override),
            "prompts_dir": self.settings.prompts_dir,
        }
        if session_id:
            kwargs["session_id"] = session_id
        config = SessionConfig(**kwargs)
        if config.session_id in self.sessions:
            raise ValueError(f"session {config.session_id!r} already exists")
        if self.settings.transcripts_dir:
            config.transcript_path = str(
                Path(self.settings.transcripts_dir) / f"{config.session_id}.jsonl")
        session = Session.start(config)
        self.sessions[config.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"no session {session_id!r}") from None


class CreateSessionBody(BaseModel):
    flags_total: Optional[int] = None
    session_id: Optional[str] = None
    lambda_override: Optional[float] = None


class InstructionBody(BaseModel):
    q: str


class ResultBody(BaseModel):
    o: str


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, WrongPhase):
        return HTTPException(status_code=409, detail={
            "error": "WrongPhase", "expected": exc.expected, "actual": exc.actual,
            "message": str(exc)})
    if isinstance(exc, (SchemaViolation, NoScriptMatch, BackendUnavailable)):
        return HTTPException(status_code=502, detail={
            "error": type(exc).__name__, "message": str(exc)})
    if isinstance(exc, (ValueError, RefptError)):
        return HTTPException(status_code=422, detail={
            "error": type(exc).__name__, "message": str(exc)})
    raise exc


def create_app(settings: EngineSettings) -> FastAPI:
    app = FastAPI(title="refpt", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    engine = Engine(settings=settings)
    app.state.engine = engine

    @app.get("/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/sessions")
    def list_sessions() -> dict[str, Any]:
        return {"sessions": [s.snapshot() for s in engine.sessions.values()]}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict[str, Any]:
        try:
            session = engine.create_session(
                flags_total=body.flags_total,
                session_id=body.session_id,
                lambda_override=body.lambda_override)
        except (ValueError, RefptError) as exc:
            raise _http_error(exc) from exc
        return session.snapshot()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        return engine.get(session_id).snapshot()

    @app.post("/sessions/{session_id}/instruction")
    def post_instruction(session_id: str, body: InstructionBody) -> dict[str, Any]:
        session = engine.get(session_id)
        try:
            outcome = session.submit_instruction(body.q)
        except Exception as exc:  # mapped to status codes above
            raise _http_error(exc) from exc
        return {"outcome": outcome.to_json(), "snapshot": session.snapshot()}

    @app.post("/sessions/{session_id}/result")
    def post_result(session_id: str, body: ResultBody) -> dict[str, Any]:
        session = engine.get(session_id)
        try:
            outcome = session.submit_result(body.o)
        except Exception as exc:
            raise _http_error(exc) from exc
        return {"outcome": outcome.to_json(), "snapshot": session.snapshot()}

    @app.get("/sessions/{session_id}/logs")
    def get_logs(session_id: str) -> dict[str, Any]:
        return engine.get(session_id).logs_json()

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> dict[str, Any]:
        return engine.get(session_id).metrics()

    @app.get("/sessions/{session_id}/knowledge/{record_id}")
    def get_record(session_id: str, record_id: str) -> dict[str, Any]:
        session = engine.get(session_id)
        try:
            return session.store.lookup(record_id).to_json()
        except RefptError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}/events")
    async def stream_events(session_id: str, request: Request,
                            since: int = 0) -> StreamingResponse:
        session = engine.get(session_id)

        async def gen():
            cursor = since
            idle = 0.0
            while True:
                if await request.is_disconnected():
                    return
                events = session.events[cursor:]
                for event in events:
                    cursor += 1
                    payload = json.dumps(event, sort_keys=True)
                    yield f"id: {event['seq']}\nevent: {event['event']}\ndata: {payload}\n\n"
                if events:
                    idle = 0.0
                from .session import Phase
                if session.phase is Phase.FINISHED and cursor >= len(session.events):
                    yield "event: stream_end\ndata: {}\n\n"
                    return
                idle += 0.05
                if idle >= 15.0:
                    yield ": keep-alive\n\n"
                    idle = 0.0
                await asyncio.sleep(0.05)

        return StreamingResponse(gen(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    return app
