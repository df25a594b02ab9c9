"""Embedded persistence for learners, sessions, messages, exercises,
estimates, and improvement areas.

Backed by a single SQLite file. Every read/write path takes the caller's
learner id and verifies ownership before touching data: cross-learner
access raises Forbidden (the service layer maps that to 404 so record
existence is not leaked).
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from .analysis import ImprovementArea
from .errors import Forbidden, NotFound
from .scoring import ProficiencyEstimate

_SCHEMA = """
CREATE TABLE IF NOT EXISTS learners (
    learner_id TEXT PRIMARY KEY,
    email TEXT UNIQUE NOT NULL,
    display_name TEXT NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    learner_id TEXT NOT NULL,
    started_at REAL NOT NULL,
    ended_at REAL,
    summary TEXT,
    summary_degraded INTEGER NOT NULL DEFAULT 0,
    last_analyzed_count INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS messages (
    message_id TEXT PRIMARY KEY,
    session_id TEXT NOT NULL,
    learner_id TEXT NOT NULL,
    seq INTEGER NOT NULL,
    role TEXT NOT NULL,
    text TEXT NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS exercises (
    exercise_id TEXT PRIMARY KEY,
    session_id TEXT NOT NULL,
    learner_id TEXT NOT NULL,
    exercise_type TEXT NOT NULL,
    prompt TEXT NOT NULL,
    state TEXT NOT NULL,
    attempt TEXT,
    feedback TEXT,
    issued_at REAL NOT NULL,
    completed_at REAL
);
CREATE TABLE IF NOT EXISTS estimates (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    learner_id TEXT NOT NULL,
    combined_level REAL NOT NULL,
    llm_level REAL,
    wb_average REAL,
    wb_median REAL,
    wb_coverage REAL,
    matched_count INTEGER,
    degraded INTEGER NOT NULL,
    assessed_at REAL NOT NULL,
    input_chars INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS areas (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    learner_id TEXT NOT NULL,
    area TEXT NOT NULL,
    confidence REAL NOT NULL,
    examples TEXT NOT NULL,
    detected_at REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_messages_session ON messages (session_id, seq);
CREATE INDEX IF NOT EXISTS idx_sessions_learner ON sessions (learner_id, started_at);
"""


@dataclass(frozen=True)
class LearnerProfile:
    learner_id: str
    email: str
    display_name: str
    created_at: float


@dataclass(frozen=True)
class ChatMessage:
    message_id: str
    role: str
    text: str
    created_at: float


def _hhmm(timestamp: float) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%H:%M")


class Store:
    """SQLite store; safe for concurrent use from multiple request handlers."""

    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.RLock()
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self):
        self._conn.close()

    # --- learners ---

    def create_learner(self, email: str, display_name: str = "") -> LearnerProfile:
        learner_id = uuid.uuid4().hex
        now = time.time()
        with self._lock:
            self._conn.execute(
                "INSERT INTO learners VALUES (?, ?, ?, ?)",
                (learner_id, email, display_name or email.split("@")[0], now),
            )
            self._conn.commit()
        return self.get_learner(learner_id)

    def get_learner(self, learner_id: str) -> LearnerProfile:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM learners WHERE learner_id = ?", (learner_id,)
            ).fetchone()
        if row is None:
            raise NotFound(f"learner {learner_id}")
        return LearnerProfile(row["learner_id"], row["email"], row["display_name"], row["created_at"])

    def get_learner_by_email(self, email: str) -> Optional[LearnerProfile]:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM learners WHERE email = ?", (email,)
            ).fetchone()
        if row is None:
            return None
        return LearnerProfile(row["learner_id"], row["email"], row["display_name"], row["created_at"])

    # --- ownership ---

    def _session_row(self, caller_id: str, session_id: str) -> sqlite3.Row:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()
        if row is None:
            raise NotFound(f"session {session_id}")
        if row["learner_id"] != caller_id:
            raise Forbidden(f"session {session_id} belongs to another learner")
        return row

    def owner_of(self, session_id: str) -> str:
        """Admin-path lookup (CLI export); not exposed through the API."""
        with self._lock:
            row = self._conn.execute(
                "SELECT learner_id FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()
        if row is None:
            raise NotFound(f"session {session_id}")
        return row["learner_id"]

    # --- sessions ---

    def create_session(self, learner_id: str) -> str:
        self.get_learner(learner_id)  # raises NotFound for unknown learners
        session_id = uuid.uuid4().hex
        with self._lock:
            self._conn.execute(
                "INSERT INTO sessions (session_id, learner_id, started_at) VALUES (?, ?, ?)",
                (session_id, learner_id, time.time()),
            )
            self._conn.commit()
        return session_id

    def get_session(self, caller_id: str, session_id: str) -> dict:
        row = self._session_row(caller_id, session_id)
        with self._lock:
            messages = self._conn.execute(
                "SELECT * FROM messages WHERE session_id = ? ORDER BY seq", (session_id,)
            ).fetchall()
            exercises = self._conn.execute(
                "SELECT * FROM exercises WHERE session_id = ? ORDER BY issued_at, exercise_id",
                (session_id,),
            ).fetchall()
            estimates = self._conn.execute(
                "SELECT * FROM estimates WHERE session_id = ? ORDER BY id", (session_id,)
            ).fetchall()
            areas = self._conn.execute(
                "SELECT * FROM areas WHERE session_id = ? ORDER BY id", (session_id,)
            ).fetchall()
        return {
            "session_id": row["session_id"],
            "learner_id": row["learner_id"],
            "started_at": row["started_at"],
            "ended_at": row["ended_at"],
            "summary": row["summary"],
            "summary_degraded": bool(row["summary_degraded"]),
            "last_analyzed_count": row["last_analyzed_count"],
            "messages": [
                {"role": m["role"], "text": m["text"], "created_at": m["created_at"]}
                for m in messages
            ],
            "exercises": [
                {
                    "exercise_id": e["exercise_id"],
                    "exercise_type": e["exercise_type"],
                    "prompt": e["prompt"],
                    "state": e["state"],
                    "attempt": e["attempt"],
                    "feedback": e["feedback"],
                    "issued_at": e["issued_at"],
                    "completed_at": e["completed_at"],
                }
                for e in exercises
            ],
            "estimates": [
                {
                    "combined_level": s["combined_level"],
                    "llm_level": s["llm_level"],
                    "wb_average": s["wb_average"],
                    "wb_median": s["wb_median"],
                    "wb_coverage": s["wb_coverage"],
                    "matched_count": s["matched_count"],
                    "degraded": bool(s["degraded"]),
                    "assessed_at": s["assessed_at"],
                    "input_chars": s["input_chars"],
                }
                for s in estimates
            ],
            "areas": [
                {
                    "area": a["area"],
                    "confidence": a["confidence"],
                    "examples": json.loads(a["examples"]),
                    "detected_at": a["detected_at"],
                }
                for a in areas
            ],
        }

    def list_sessions(self, caller_id: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT session_id FROM sessions WHERE learner_id = ? ORDER BY started_at",
                (caller_id,),
            ).fetchall()
        return [self.get_session(caller_id, r["session_id"]) for r in rows]

    def end_session(self, caller_id: str, session_id: str, summary: str, degraded: bool = False):
        self._session_row(caller_id, session_id)
        with self._lock:
            self._conn.execute(
                "UPDATE sessions SET ended_at = ?, summary = ?, summary_degraded = ? "
                "WHERE session_id = ?",
                (time.time(), summary, int(degraded), session_id),
            )
            self._conn.commit()

    def set_last_analyzed(self, caller_id: str, session_id: str, learner_message_count: int):
        self._session_row(caller_id, session_id)
        with self._lock:
            self._conn.execute(
                "UPDATE sessions SET last_analyzed_count = ? WHERE session_id = ?",
                (learner_message_count, session_id),
            )
            self._conn.commit()

    # --- messages ---

    def add_message(self, caller_id: str, session_id: str, role: str, text: str) -> ChatMessage:
        self._session_row(caller_id, session_id)
        message_id = uuid.uuid4().hex
        now = time.time()
        with self._lock:
            seq_row = self._conn.execute(
                "SELECT COALESCE(MAX(seq), 0) + 1 AS seq FROM messages WHERE session_id = ?",
                (session_id,),
            ).fetchone()
            self._conn.execute(
                "INSERT INTO messages VALUES (?, ?, ?, ?, ?, ?, ?)",
                (message_id, session_id, caller_id, seq_row["seq"], role, text, now),
            )
            self._conn.commit()
        return ChatMessage(message_id, role, text, now)

    def learner_message_count(self, caller_id: str, session_id: str) -> int:
        self._session_row(caller_id, session_id)
        with self._lock:
            row = self._conn.execute(
                "SELECT COUNT(*) AS n FROM messages WHERE session_id = ? AND role = 'learner'",
                (session_id,),
            ).fetchone()
        return row["n"]

    # --- exercises ---

    def add_exercise(self, caller_id: str, session_id: str, exercise_type: str, prompt: str) -> str:
        self._session_row(caller_id, session_id)
        exercise_id = uuid.uuid4().hex
        with self._lock:
            self._conn.execute(
                "INSERT INTO exercises (exercise_id, session_id, learner_id, exercise_type, "
                "prompt, state, issued_at) VALUES (?, ?, ?, ?, ?, 'issued', ?)",
                (exercise_id, session_id, caller_id, exercise_type, prompt, time.time()),
            )
            self._conn.commit()
        return exercise_id

    def active_exercise(self, caller_id: str, session_id: str) -> Optional[dict]:
        self._session_row(caller_id, session_id)
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM exercises WHERE session_id = ? AND state != 'completed' "
                "ORDER BY issued_at LIMIT 1",
                (session_id,),
            ).fetchone()
        if row is None:
            return None
        return dict(row)

    def record_attempt(self, caller_id: str, session_id: str, exercise_id: str, attempt: str):
        self._session_row(caller_id, session_id)
        with self._lock:
            cur = self._conn.execute(
                "UPDATE exercises SET state = 'attempted', attempt = ? "
                "WHERE exercise_id = ? AND session_id = ? AND state = 'issued'",
                (attempt, exercise_id, session_id),
            )
            self._conn.commit()
        if cur.rowcount != 1:
            raise NotFound(f"no issued exercise {exercise_id}")

    def record_feedback(self, caller_id: str, session_id: str, exercise_id: str, feedback: str):
        self._session_row(caller_id, session_id)
        with self._lock:
            cur = self._conn.execute(
                "UPDATE exercises SET state = 'completed', feedback = ?, completed_at = ? "
                "WHERE exercise_id = ? AND session_id = ? AND state = 'attempted'",
                (feedback, time.time(), exercise_id, session_id),
            )
            self._conn.commit()
        if cur.rowcount != 1:
            raise NotFound(f"no attempted exercise {exercise_id}")

    # --- estimates / areas ---

    def add_estimate(self, caller_id: str, session_id: str, estimate: ProficiencyEstimate):
        self._session_row(caller_id, session_id)
        wb = estimate.wordbank
        with self._lock:
            self._conn.execute(
                "INSERT INTO estimates (session_id, learner_id, combined_level, llm_level, "
                "wb_average, wb_median, wb_coverage, matched_count, degraded, assessed_at, "
                "input_chars) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    session_id,
                    caller_id,
                    estimate.combined_level,
                    estimate.llm_level,
                    wb.average_level if wb else None,
                    wb.median_level if wb else None,
                    wb.coverage if wb else None,
                    len(wb.matched) if wb else None,
                    int(estimate.degraded),
                    estimate.assessed_at,
                    estimate.input_chars,
                ),
            )
            self._conn.commit()

    def add_areas(self, caller_id: str, session_id: str, areas: list[ImprovementArea]):
        self._session_row(caller_id, session_id)
        with self._lock:
            for area in areas:
                self._conn.execute(
                    "INSERT INTO areas (session_id, learner_id, area, confidence, examples, "
                    "detected_at) VALUES (?, ?, ?, ?, ?, ?)",
                    (
                        session_id,
                        caller_id,
                        area.area,
                        area.confidence,
                        json.dumps(list(area.examples)),
                        area.detected_at,
                    ),
                )
            self._conn.commit()

    def latest_areas(self, caller_id: str) -> list[dict]:
        """Most recent analysis batch across the learner's sessions."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM areas WHERE learner_id = ? ORDER BY detected_at DESC, id",
                (caller_id,),
            ).fetchall()
        if not rows:
            return []
        latest_ts = rows[0]["detected_at"]
        return [
            {
                "area": r["area"],
                "confidence": r["confidence"],
                "examples": json.loads(r["examples"]),
                "detected_at": r["detected_at"],
            }
            for r in rows
            if r["detected_at"] == latest_ts
        ]

    def latest_level(self, caller_id: str) -> Optional[float]:
        with self._lock:
            row = self._conn.execute(
                "SELECT combined_level FROM estimates WHERE learner_id = ? "
                "ORDER BY assessed_at DESC, id DESC LIMIT 1",
                (caller_id,),
            ).fetchone()
        return row["combined_level"] if row else None

    # --- exports / aggregates ---

    def export_transcript(self, caller_id: str, session_id: str, format: str = "json"):
        record = self.get_session(caller_id, session_id)
        if format == "json":
            return {
                "session_id": record["session_id"],
                "learner_id": record["learner_id"],
                "started_at": record["started_at"],
                "ended_at": record["ended_at"],
                "summary": record["summary"],
                "messages": record["messages"],
                "exercises": record["exercises"],
                "estimates": record["estimates"],
                "areas": record["areas"],
            }
        if format == "text":
            lines = []
            for message in record["messages"]:
                speaker = "Learner" if message["role"] == "learner" else "Tutor"
                lines.append(f"[{_hhmm(message['created_at'])}] {speaker}: {message['text']}")
            return "\n".join(lines)
        raise ValueError(f"unknown transcript format {format!r}")

    def dashboard_data(self, caller_id: str) -> dict:
        with self._lock:
            estimates = self._conn.execute(
                "SELECT assessed_at, combined_level FROM estimates WHERE learner_id = ? "
                "ORDER BY assessed_at, id",
                (caller_id,),
            ).fetchall()
            areas = self._conn.execute(
                "SELECT detected_at, area, confidence FROM areas WHERE learner_id = ? "
                "ORDER BY detected_at, id",
                (caller_id,),
            ).fetchall()
            session_count = self._conn.execute(
                "SELECT COUNT(*) AS n FROM sessions WHERE learner_id = ?", (caller_id,)
            ).fetchone()["n"]
            exercise_rows = self._conn.execute(
                "SELECT state, COUNT(*) AS n FROM exercises WHERE learner_id = ? GROUP BY state",
                (caller_id,),
            ).fetchall()
        exercise_counts = {"issued": 0, "attempted": 0, "completed": 0}
        for row in exercise_rows:
            exercise_counts[row["state"]] = row["n"]
        return {
            "level_series": [[e["assessed_at"], e["combined_level"]] for e in estimates],
            "area_history": [[a["detected_at"], a["area"], a["confidence"]] for a in areas],
            "session_count": session_count,
            "exercise_counts": exercise_counts,
        }
