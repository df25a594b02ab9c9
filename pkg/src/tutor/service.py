"""HTTP API over the engine.

Auth is email login with a signed bearer token (magic-link-style, no
passwords). Cross-learner access maps to 404 so record existence is not
leaked; concurrent turns on one session return 409.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import secrets
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .config import AppConfig
from .dialogue import Engine, TurnResult
from .errors import (
    Busy,
    Forbidden,
    NotFound,
    ProviderError,
    SessionClosed,
    UnknownLearner,
)
from .store import Store


class TokenSigner:
    """learner_id.<hmac> bearer tokens; the secret persists in the data dir."""

    def __init__(self, secret: bytes):
        self.secret = secret

    @classmethod
    def from_data_dir(cls, data_dir: str) -> "TokenSigner":
        os.makedirs(data_dir, exist_ok=True)
        secret_path = os.path.join(data_dir, "secret.key")
        if os.path.exists(secret_path):
            with open(secret_path, "rb") as fh:
                secret = fh.read()
        else:
            secret = secrets.token_bytes(32)
            with open(secret_path, "wb") as fh:
                fh.write(secret)
        return cls(secret)

    def issue(self, learner_id: str) -> str:
        mac = hmac.new(self.secret, learner_id.encode(), hashlib.sha256).hexdigest()
        return f"{learner_id}.{mac}"

    def verify(self, token: str) -> Optional[str]:
        if "." not in token:
            return None
        learner_id, mac = token.rsplit(".", 1)
        expected = hmac.new(self.secret, learner_id.encode(), hashlib.sha256).hexdigest()
        if hmac.compare_digest(mac, expected):
            return learner_id
        return None


class LoginRequest(BaseModel):
    email: str


class MessageRequest(BaseModel):
    text: str


def _turn_result_json(result: TurnResult) -> dict:
    return {
        "assistant_reply": result.assistant_reply,
        "exercise_event": result.exercise_event,
        "analysis_event": (
            [
                {
                    "area": a.area,
                    "confidence": a.confidence,
                    "examples": list(a.examples),
                    "detected_at": a.detected_at,
                }
                for a in result.analysis_event
            ]
            if result.analysis_event is not None
            else None
        ),
        "proficiency_event": (
            {
                "combined_level": result.proficiency_event.combined_level,
                "llm_level": result.proficiency_event.llm_level,
                "degraded": result.proficiency_event.degraded,
                "assessed_at": result.proficiency_event.assessed_at,
            }
            if result.proficiency_event is not None
            else None
        ),
        "recommended": (
            [
                {
                    "area": r.area,
                    "resource_type": r.resource_type,
                    "title": r.title,
                    "description": r.description,
                    "url": r.url,
                    "difficulty_level": r.difficulty_level,
                }
                for r in result.recommended
            ]
            if result.recommended is not None
            else None
        ),
    }


def create_app(engine: Engine, signer: TokenSigner, config: Optional[AppConfig] = None) -> FastAPI:
    app = FastAPI(title="tutor", version="0.1.0")
    store: Store = engine.store

    def authenticate(authorization: str = Header(default="")) -> str:
        if not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        learner_id = signer.verify(authorization.removeprefix("Bearer "))
        if learner_id is None:
            raise HTTPException(status_code=401, detail="invalid token")
        try:
            store.get_learner(learner_id)
        except NotFound:
            raise HTTPException(status_code=401, detail="unknown learner") from None
        return learner_id

    @app.exception_handler(NotFound)
    @app.exception_handler(Forbidden)
    async def _not_found(request, exc):
        # Forbidden deliberately indistinguishable from NotFound on the wire
        return JSONResponse(status_code=404, content={"detail": "not found"})

    @app.exception_handler(Busy)
    async def _busy(request, exc):
        return JSONResponse(status_code=409, content={"detail": "a turn is already in flight"})

    @app.exception_handler(SessionClosed)
    async def _closed(request, exc):
        return JSONResponse(status_code=409, content={"detail": "session is closed"})

    @app.exception_handler(ProviderError)
    async def _provider(request, exc):
        return JSONResponse(status_code=502, content={"detail": f"provider failure: {exc}"})

    @app.post("/auth/login")
    def login(body: LoginRequest):
        email = body.email.strip().lower()
        if "@" not in email:
            raise HTTPException(status_code=422, detail="invalid email")
        learner = store.get_learner_by_email(email)
        if learner is None:
            learner = store.create_learner(email)
        return {"token": signer.issue(learner.learner_id), "learner_id": learner.learner_id}

    @app.post("/sessions")
    def create_session(learner_id: str = Depends(authenticate)):
        try:
            session_id = engine.start_session(learner_id)
        except UnknownLearner:
            raise HTTPException(status_code=401, detail="unknown learner") from None
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/messages")
    def post_message(
        session_id: str,
        body: MessageRequest,
        learner_id: str = Depends(authenticate),
    ):
        if not body.text.strip():
            raise HTTPException(status_code=422, detail="empty message text")
        result = engine.handle_learner_message(learner_id, session_id, body.text)
        return _turn_result_json(result)

    @app.post("/sessions/{session_id}/end")
    def end_session(session_id: str, learner_id: str = Depends(authenticate)):
        summary = engine.end_session(learner_id, session_id)
        return {"summary": summary.summary, "degraded": summary.degraded}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str, learner_id: str = Depends(authenticate)):
        return store.get_session(learner_id, session_id)

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(
        session_id: str,
        format: str = Query(default="json"),
        learner_id: str = Depends(authenticate),
    ):
        if format not in ("json", "text"):
            raise HTTPException(status_code=422, detail="format must be json or text")
        document = store.export_transcript(learner_id, session_id, format)
        if format == "text":
            return PlainTextResponse(document)
        return document

    @app.get("/dashboard")
    def dashboard(learner_id: str = Depends(authenticate)):
        return store.dashboard_data(learner_id)

    @app.get("/resources/recommended")
    def recommended(learner_id: str = Depends(authenticate)):
        from .analysis import ImprovementArea

        areas = [
            ImprovementArea(
                area=a["area"],
                confidence=a["confidence"],
                examples=tuple(a["examples"]),
                detected_at=a["detected_at"],
                session_id="",
            )
            for a in store.latest_areas(learner_id)
        ]
        if not areas or engine.catalog is None:
            return {"resources": []}
        level = store.latest_level(learner_id) or 7.0
        resources = engine._recommend(learner_id, areas)
        return {
            "level": level,
            "resources": [
                {
                    "area": r.area,
                    "resource_type": r.resource_type,
                    "title": r.title,
                    "description": r.description,
                    "url": r.url,
                    "difficulty_level": r.difficulty_level,
                }
                for r in resources
            ],
        }

    @app.post("/transcribe")
    def transcribe(learner_id: str = Depends(authenticate)):
        # declared voice extension point; transcription is not implemented
        raise HTTPException(status_code=501, detail="transcription not implemented")

    return app
