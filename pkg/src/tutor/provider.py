"""Uniform LLM provider interface: typed prompt kinds, a deterministic
scripted mock for offline tests, and a generic HTTP chat-completion adapter.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources as importlib_resources
from typing import Optional

import httpx

from .errors import MalformedJson, NoJsonFound, ProviderError, Timeout

log = logging.getLogger(__name__)


class PromptKind(str, Enum):
    TUTOR_REPLY = "tutor_reply"
    LEVEL_JUDGE = "level_judge"
    IMPROVEMENT_ANALYSIS = "improvement_analysis"
    EXERCISE_FEEDBACK = "exercise_feedback"
    SESSION_SUMMARY = "session_summary"


@dataclass(frozen=True)
class ChatRequest:
    kind: PromptKind
    system_prompt: str
    user_text: str
    history: tuple = ()  # ordered (role, text) pairs, role in {learner, assistant}
    max_reply_chars: int = 4000

    def __post_init__(self):
        if not isinstance(self.kind, PromptKind):
            raise ValueError("ChatRequest requires a PromptKind")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    provider_id: str
    latency_ms: int


def load_prompt(kind: PromptKind) -> str:
    """Load the versioned prompt template asset for a kind."""
    ref = importlib_resources.files("tutor") / "prompts" / f"{kind.value}.txt"
    return ref.read_text(encoding="utf-8")


class Provider:
    """Interface: complete(request) -> ChatResponse."""

    def complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class ScriptedMockProvider(Provider):
    """Deterministic mock: per-kind reply queues, consumed in order.

    Exhausting a queue repeats its last entry. Unscripted kinds error.
    Internally serialized so reply order is globally consistent.
    """

    def __init__(self, fixtures: dict[PromptKind, list[str]]):
        self._fixtures = {k: list(v) for k, v in fixtures.items() if v}
        self._cursors: dict[PromptKind, int] = {}
        self._lock = threading.Lock()
        self.calls: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls.append(request)
            replies = self._fixtures.get(request.kind)
            if not replies:
                raise ProviderError(
                    f"no scripted replies for kind {request.kind.value!r}",
                    transient=False,
                )
            i = self._cursors.get(request.kind, 0)
            text = replies[min(i, len(replies) - 1)]
            self._cursors[request.kind] = i + 1
            return ChatResponse(text=text, provider_id="mock", latency_ms=0)


class FailingProvider(Provider):
    """Always raises; used to exercise degraded paths in tests."""

    def __init__(self, transient: bool = False):
        self.transient = transient

    def complete(self, request: ChatRequest) -> ChatResponse:
        raise ProviderError("scripted failure", transient=self.transient)


class HttpProvider(Provider):
    """Adapter for any OpenAI-compatible chat-completion endpoint.

    POST {base_url}/chat/completions with {model, messages, max_tokens};
    the reply is the first choice's message content. Transient transport
    failures and 5xx are retried with backoff.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout_s: float = 30.0,
        retries: int = 2,
        backoff_s: tuple[float, ...] = (0.25, 1.0),
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s

    def _messages(self, request: ChatRequest) -> list[dict]:
        messages = [{"role": "system", "content": request.system_prompt}]
        for role, text in request.history:
            wire_role = "user" if role == "learner" else "assistant"
            messages.append({"role": wire_role, "content": text})
        messages.append({"role": "user", "content": request.user_text})
        return messages

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = {
            "model": self.model,
            "messages": self._messages(request),
            "max_tokens": max(1, request.max_reply_chars // 3),
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt > 0:
                time.sleep(self.backoff_s[min(attempt - 1, len(self.backoff_s) - 1)])
            started = time.monotonic()
            try:
                resp = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout_s,
                )
            except httpx.TimeoutException as exc:
                last_error = Timeout(f"provider timeout after {self.timeout_s}s")
                log.warning("provider timeout (attempt %d): %s", attempt + 1, exc)
                continue
            except httpx.TransportError as exc:
                last_error = ProviderError(str(exc), transient=True)
                log.warning("provider transport error (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 500:
                last_error = ProviderError(f"provider 5xx: {resp.status_code}", transient=True)
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"provider rejected request: {resp.status_code}", transient=False)
            try:
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
                raise ProviderError(f"malformed provider response: {exc}", transient=False)
            if not text:
                raise ProviderError("empty provider reply", transient=False)
            latency_ms = int((time.monotonic() - started) * 1000)
            return ChatResponse(text=text, provider_id=self.model, latency_ms=latency_ms)
        raise last_error if last_error else ProviderError("provider failed", transient=True)


def extract_json_array(text: str):
    """Pull a JSON array out of a raw model reply.

    Strips code fences and any prose before the first ``[`` and after its
    matching ``]``; parses strictly in between.
    """
    start = text.find("[")
    if start == -1:
        raise NoJsonFound(text)
    depth = 0
    in_string = False
    escape = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                snippet = text[start : i + 1]
                try:
                    return json.loads(snippet)
                except json.JSONDecodeError as exc:
                    raise MalformedJson(snippet, str(exc)) from None
    raise MalformedJson(text[start:], "unterminated array")


def scripted_mock(fixtures: dict[PromptKind, list[str]]) -> ScriptedMockProvider:
    return ScriptedMockProvider(fixtures)
