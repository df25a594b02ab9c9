"""Improvement-area identification.

Learner messages are aggregated into one text chunk once enough new input
has accumulated (default 3 learner messages), sent to the model, and the
returned JSON array is validated against a fixed 16-area taxonomy and a
strict confidence threshold (> 0.3 by default).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import EmptySession
from .provider import ChatRequest, PromptKind, Provider, extract_json_array, load_prompt

log = logging.getLogger(__name__)

# Fixed taxonomy; order doubles as the tie-break for equal confidences.
AREA_TAXONOMY = (
    "Articles",
    "Adjectives",
    "Adverbs",
    "General Grammar",
    "Tenses",
    "Subject-Verb Agreement",
    "Vocabulary Range",
    "Sentence Structure",
    "Word Order",
    "Phrasal Verbs",
    "Idioms",
    "Conjunctions",
    "Word Choice",
    "Repetition",
    "Punctuation",
    "Capitalisation",
)


def _normalize_area(name: str) -> str:
    return (
        name.strip()
        .lower()
        .replace("–", " ")  # en dash
        .replace("-", " ")
        .replace("_", " ")
    )


_CANONICAL = {_normalize_area(a): a for a in AREA_TAXONOMY}
_TAXONOMY_RANK = {a: i for i, a in enumerate(AREA_TAXONOMY)}


def canonical_area(name: str) -> Optional[str]:
    """Case/hyphen/space-insensitive taxonomy membership; canonical name or None."""
    return _CANONICAL.get(" ".join(_normalize_area(name).split()))


@dataclass(frozen=True)
class ImprovementArea:
    area: str
    confidence: float
    examples: tuple
    detected_at: float
    session_id: str


@dataclass(frozen=True)
class AnalysisPolicy:
    min_new_learner_messages: int = 3
    confidence_threshold: float = 0.3
    max_areas: int = 3


DEFAULT_POLICY = AnalysisPolicy()


def should_analyze(learner_messages_since_last: int, policy: AnalysisPolicy = DEFAULT_POLICY) -> bool:
    return learner_messages_since_last >= policy.min_new_learner_messages


def aggregate_learner_text(messages: list) -> str:
    """Newline-join learner messages in order; assistant messages excluded.

    messages: ordered (role, text) pairs.
    """
    learner_texts = [text for role, text in messages if role == "learner"]
    if not learner_texts:
        raise EmptySession("no learner messages to aggregate")
    return "\n".join(learner_texts)


def _validate_element(element, threshold: float) -> Optional[tuple[str, float, tuple]]:
    if not isinstance(element, dict):
        log.warning("analysis element is not an object: %r", element)
        return None
    area_raw = element.get("area")
    confidence = element.get("confidence")
    examples = element.get("examples", [])
    if not isinstance(area_raw, str):
        log.warning("analysis element missing area: %r", element)
        return None
    area = canonical_area(area_raw)
    if area is None:
        log.warning("dropping non-taxonomy area %r", area_raw)
        return None
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
        log.warning("bad confidence for %r: %r", area, confidence)
        return None
    confidence = float(confidence)
    if not 0.0 <= confidence <= 1.0:
        log.warning("confidence out of range for %r: %r", area, confidence)
        return None
    if not isinstance(examples, list) or not all(isinstance(e, str) for e in examples):
        log.warning("bad examples for %r: %r", area, examples)
        return None
    if confidence <= threshold:  # strictly greater than threshold survives
        return None
    return area, confidence, tuple(examples)


def identify_improvement_areas(
    provider: Provider,
    chunk: str,
    session_id: str,
    policy: AnalysisPolicy = DEFAULT_POLICY,
) -> list[ImprovementArea]:
    """Ask the model for improvement areas and validate the JSON contract.

    Malformed individual elements are dropped with a warning; only a fully
    unparsable reply raises. Output is at most max_areas, sorted by
    confidence descending with taxonomy-order tie-break.
    """
    if not chunk:
        raise EmptySession("empty analysis chunk")
    prompt = load_prompt(PromptKind.IMPROVEMENT_ANALYSIS).format(
        learner_text=chunk, max_areas=policy.max_areas
    )
    response = provider.complete(
        ChatRequest(
            kind=PromptKind.IMPROVEMENT_ANALYSIS,
            system_prompt=prompt,
            user_text=chunk,
        )
    )
    elements = extract_json_array(response.text)
    now = time.time()
    valid = []
    for element in elements:
        parsed = _validate_element(element, policy.confidence_threshold)
        if parsed is not None:
            valid.append(parsed)
    valid.sort(key=lambda t: (-t[1], _TAXONOMY_RANK[t[0]]))
    return [
        ImprovementArea(
            area=area,
            confidence=confidence,
            examples=examples,
            detected_at=now,
            session_id=session_id,
        )
        for area, confidence, examples in valid[: policy.max_areas]
    ]
