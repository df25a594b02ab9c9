"""Turn orchestration: tutoring replies, exercise lifecycle, analysis and
proficiency triggers.

A turn persists the learner message first, then talks to the provider; a
provider failure leaves the learner message in place and nothing else
(callers may retry). Turns within one session are serialized; a second
concurrent message raises Busy.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Optional

from . import analysis as analysis_mod
from . import scoring
from .analysis import AnalysisPolicy, ImprovementArea
from .errors import (
    Busy,
    EmptySession,
    MalformedJson,
    NoJsonFound,
    NoSignal,
    NotFound,
    ProviderError,
    SessionClosed,
    UnknownLearner,
)
from .provider import ChatRequest, PromptKind, Provider, load_prompt
from .resources import Resource, ResourceCatalog, recommend
from .scoring import FusionWeights, ProficiencyEstimate
from .store import Store
from .wordbank import WordBank

log = logging.getLogger(__name__)

EXERCISE_TYPES = ("fill_in_blank", "rewrite", "multiple_choice", "free_response")

# Ordered (phrase, type) trigger table; configurable.
DEFAULT_TRIGGERS = (
    ("fill in the blank", "fill_in_blank"),
    ("complete the sentence", "fill_in_blank"),
    ("rewrite the sentence", "rewrite"),
    ("choose the correct", "multiple_choice"),
    ("which of the following", "multiple_choice"),
    ("your task is", "free_response"),
    ("try this exercise", "free_response"),
)


def detect_exercise(
    assistant_text: str,
    triggers: tuple = DEFAULT_TRIGGERS,
) -> Optional[tuple[str, str]]:
    """Scan an assistant reply for exercise trigger phrases.

    The earliest match in the text wins (table order breaks ties); the
    exercise prompt is the full assistant message.
    """
    lowered = assistant_text.lower()
    best: Optional[tuple[int, int, str]] = None  # (position, table index, type)
    for index, (phrase, exercise_type) in enumerate(triggers):
        position = lowered.find(phrase)
        if position != -1 and (best is None or (position, index) < (best[0], best[1])):
            best = (position, index, exercise_type)
    if best is None:
        return None
    return best[2], assistant_text


@dataclass
class EngineConfig:
    context_window: int = 12  # most recent turns sent to the provider
    assess_every: int = 3  # judge + fusion cadence, in learner messages
    policy: AnalysisPolicy = field(default_factory=AnalysisPolicy)
    weights: FusionWeights = field(default_factory=FusionWeights)
    wb_statistic: str = "median"
    triggers: tuple = DEFAULT_TRIGGERS
    recommend_k: int = 3


@dataclass
class TurnResult:
    assistant_reply: str
    exercise_event: Optional[dict] = None  # {"kind": issued|completed, ...}
    analysis_event: Optional[list[ImprovementArea]] = None
    proficiency_event: Optional[ProficiencyEstimate] = None
    recommended: Optional[list[Resource]] = None


@dataclass
class SessionSummary:
    session_id: str
    summary: str
    degraded: bool


class Engine:
    """One engine per process; all state lives in the store."""

    def __init__(
        self,
        store: Store,
        provider: Provider,
        bank: WordBank,
        catalog: Optional[ResourceCatalog] = None,
        config: Optional[EngineConfig] = None,
    ):
        self.store = store
        self.provider = provider
        self.bank = bank
        self.catalog = catalog
        self.config = config or EngineConfig()
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    # --- session lifecycle ---

    def start_session(self, learner_id: str) -> str:
        try:
            return self.store.create_session(learner_id)
        except NotFound:
            raise UnknownLearner(learner_id) from None

    def end_session(self, caller_id: str, session_id: str) -> SessionSummary:
        record = self.store.get_session(caller_id, session_id)
        if record["ended_at"] is not None:
            raise SessionClosed(session_id)
        lock = self._session_lock(session_id)
        if not lock.acquire(blocking=False):
            raise Busy(session_id)
        try:
            self._refresh_proficiency(caller_id, session_id, record["messages"])
            transcript = "\n".join(
                f"{m['role']}: {m['text']}" for m in record["messages"]
            )
            degraded = False
            try:
                response = self.provider.complete(
                    ChatRequest(
                        kind=PromptKind.SESSION_SUMMARY,
                        system_prompt=load_prompt(PromptKind.SESSION_SUMMARY).format(
                            history=transcript
                        ),
                        user_text=transcript or "(empty session)",
                    )
                )
                summary = response.text
            except ProviderError:
                summary = "Summary unavailable for this session."
                degraded = True
            self.store.end_session(caller_id, session_id, summary, degraded)
            return SessionSummary(session_id=session_id, summary=summary, degraded=degraded)
        finally:
            lock.release()

    # --- the tutoring turn ---

    def handle_learner_message(self, caller_id: str, session_id: str, text: str) -> TurnResult:
        if not text or not text.strip():
            raise ValueError("empty learner message")
        record = self.store.get_session(caller_id, session_id)
        if record["ended_at"] is not None:
            raise SessionClosed(session_id)
        lock = self._session_lock(session_id)
        if not lock.acquire(blocking=False):
            raise Busy(session_id)
        try:
            return self._turn(caller_id, session_id, text)
        finally:
            lock.release()

    def _turn(self, caller_id: str, session_id: str, text: str) -> TurnResult:
        config = self.config
        active = self.store.active_exercise(caller_id, session_id)
        history = self.store.get_session(caller_id, session_id)["messages"]

        # (1) learner message persists even if the provider fails below
        self.store.add_message(caller_id, session_id, "learner", text)
        learner_count = self.store.learner_message_count(caller_id, session_id)

        exercise_event: Optional[dict] = None
        level_hint = self.store.latest_level(caller_id) or 7.0

        # (2) either answer the active exercise or hold a normal tutoring turn
        if active is not None and active["state"] == "issued":
            feedback_prompt = load_prompt(PromptKind.EXERCISE_FEEDBACK).format(
                exercise_prompt=active["prompt"],
                learner_text=text,
                level=f"{level_hint:.1f}",
            )
            response = self.provider.complete(
                ChatRequest(
                    kind=PromptKind.EXERCISE_FEEDBACK,
                    system_prompt=feedback_prompt,
                    user_text=text,
                )
            )
            assistant_reply = response.text
            self.store.record_attempt(caller_id, session_id, active["exercise_id"], text)
            self.store.record_feedback(
                caller_id, session_id, active["exercise_id"], assistant_reply
            )
            exercise_event = {
                "kind": "completed",
                "exercise_id": active["exercise_id"],
                "exercise_type": active["exercise_type"],
                "prompt": active["prompt"],
                "feedback": assistant_reply,
            }
        else:
            window = history[-config.context_window :]
            reply_prompt = load_prompt(PromptKind.TUTOR_REPLY).format(
                level=f"{level_hint:.1f}",
                history="\n".join(f"{m['role']}: {m['text']}" for m in window),
                learner_text=text,
            )
            response = self.provider.complete(
                ChatRequest(
                    kind=PromptKind.TUTOR_REPLY,
                    system_prompt=reply_prompt,
                    user_text=text,
                    history=tuple((m["role"], m["text"]) for m in window),
                )
            )
            assistant_reply = response.text

        self.store.add_message(caller_id, session_id, "assistant", assistant_reply)

        # (3) new exercise detection; one-active-exercise rule
        if exercise_event is None:
            detected = detect_exercise(assistant_reply, config.triggers)
            if detected is not None:
                if self.store.active_exercise(caller_id, session_id) is None:
                    exercise_type, prompt = detected
                    exercise_id = self.store.add_exercise(
                        caller_id, session_id, exercise_type, prompt
                    )
                    exercise_event = {
                        "kind": "issued",
                        "exercise_id": exercise_id,
                        "exercise_type": exercise_type,
                        "prompt": prompt,
                    }
                else:
                    log.info("exercise detected while another is active; ignored")

        # (4) improvement analysis at the configured cadence
        analysis_event: Optional[list[ImprovementArea]] = None
        recommended: Optional[list[Resource]] = None
        session = self.store.get_session(caller_id, session_id)
        new_messages = learner_count - session["last_analyzed_count"]
        if analysis_mod.should_analyze(new_messages, config.policy):
            analysis_event = self._run_analysis(
                caller_id, session_id, session["messages"], learner_count
            )
            if analysis_event:
                recommended = self._recommend(caller_id, analysis_event)

        # (5) proficiency refresh cadence
        proficiency_event: Optional[ProficiencyEstimate] = None
        if learner_count % config.assess_every == 0:
            proficiency_event = self._refresh_proficiency(
                caller_id, session_id, session["messages"]
            )

        return TurnResult(
            assistant_reply=assistant_reply,
            exercise_event=exercise_event,
            analysis_event=analysis_event,
            proficiency_event=proficiency_event,
            recommended=recommended,
        )

    def _run_analysis(
        self, caller_id: str, session_id: str, messages: list, learner_count: int
    ) -> Optional[list[ImprovementArea]]:
        try:
            chunk = analysis_mod.aggregate_learner_text(
                [(m["role"], m["text"]) for m in messages]
            )
            areas = analysis_mod.identify_improvement_areas(
                self.provider, chunk, session_id, self.config.policy
            )
        except (ProviderError, NoJsonFound, MalformedJson, EmptySession) as exc:
            # watermark not advanced: the next learner message re-triggers
            log.warning("analysis skipped: %s", exc)
            return None
        self.store.add_areas(caller_id, session_id, areas)
        self.store.set_last_analyzed(caller_id, session_id, learner_count)
        return areas

    def _recommend(self, caller_id: str, areas: list[ImprovementArea]) -> list[Resource]:
        if self.catalog is None or self.catalog.size == 0:
            return []
        level = self.store.latest_level(caller_id) or 7.0
        return recommend(self.catalog, areas, level, self.config.recommend_k)

    def _refresh_proficiency(
        self, caller_id: str, session_id: str, messages: list
    ) -> Optional[ProficiencyEstimate]:
        learner_text = "\n".join(m["text"] for m in messages if m["role"] == "learner")
        if not learner_text:
            return None
        try:
            estimate = scoring.assess_proficiency(
                self.bank,
                self.provider,
                learner_text,
                weights=self.config.weights,
                wb_statistic=self.config.wb_statistic,
            )
        except NoSignal:
            return None
        self.store.add_estimate(caller_id, session_id, estimate)
        return estimate
