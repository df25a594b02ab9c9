"""Hybrid proficiency assessment.

Word-bank statistics over lemmatized learner text are fused with an
LLM-judge level by a weighted sum (default weights 0.4 word bank /
0.6 judge). When one signal is missing its weight is renormalized to 1
and the estimate is flagged degraded.
"""

from __future__ import annotations

import re
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import NoSignal, ProviderError, UnparsableJudgeReply
from .provider import ChatRequest, PromptKind, Provider, load_prompt
from .wordbank import MAX_LEVEL, MIN_LEVEL, WordBank, lemmatize, tokenize

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


@dataclass(frozen=True)
class WordBankScore:
    matched: tuple  # (lemma, level) pairs, one per matched token occurrence
    average_level: Optional[float]
    median_level: Optional[float]
    coverage: float  # matched tokens / alphabetic tokens, in [0, 1]


@dataclass(frozen=True)
class FusionWeights:
    w_wb: float = 0.4
    w_llm: float = 0.6

    def __post_init__(self):
        if self.w_wb < 0 or self.w_llm < 0:
            raise ValueError("fusion weights must be non-negative")
        if abs(self.w_wb + self.w_llm - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")


DEFAULT_WEIGHTS = FusionWeights()


@dataclass(frozen=True)
class ProficiencyEstimate:
    wordbank: Optional[WordBankScore]
    llm_level: Optional[float]
    combined_level: float
    assessed_at: float
    input_chars: int
    degraded: bool = False


def wordbank_score(bank: WordBank, text: str) -> WordBankScore:
    """Match each token's lemma against the bank; duplicates count each time."""
    tokens = tokenize(text)
    matched = []
    for token in tokens:
        lemma = lemmatize(token)
        level = bank.lookup(lemma)
        if level is not None:
            matched.append((lemma, level))
    if matched:
        levels = [level for _, level in matched]
        average = statistics.fmean(levels)
        median = float(statistics.median(levels))
    else:
        average = None
        median = None
    coverage = len(matched) / len(tokens) if tokens else 0.0
    return WordBankScore(
        matched=tuple(matched),
        average_level=average,
        median_level=median,
        coverage=coverage,
    )


def parse_judge_reply(reply: str) -> float:
    """First numeric token (integer or decimal), clamped to [1, 14]."""
    match = _NUMBER_RE.search(reply)
    if match is None:
        raise UnparsableJudgeReply(reply)
    value = float(match.group(0))
    return min(float(MAX_LEVEL), max(float(MIN_LEVEL), value))


def llm_level_estimate(provider: Provider, text: str) -> float:
    prompt = load_prompt(PromptKind.LEVEL_JUDGE).format(learner_text=text)
    response = provider.complete(
        ChatRequest(
            kind=PromptKind.LEVEL_JUDGE,
            system_prompt=prompt,
            user_text=text,
            max_reply_chars=32,
        )
    )
    return parse_judge_reply(response.text)


def fuse_levels(
    wb: Optional[float],
    llm: Optional[float],
    weights: FusionWeights = DEFAULT_WEIGHTS,
) -> float:
    """Weighted combination of the two levels; single-source renormalizes."""
    if wb is None and llm is None:
        raise NoSignal("neither word-bank nor judge level available")
    if wb is None:
        combined = llm
    elif llm is None:
        combined = wb
    else:
        combined = weights.w_wb * wb + weights.w_llm * llm
    return min(float(MAX_LEVEL), max(float(MIN_LEVEL), combined))


def assess_proficiency(
    bank: WordBank,
    provider: Provider,
    text: str,
    weights: FusionWeights = DEFAULT_WEIGHTS,
    wb_statistic: str = "median",
) -> ProficiencyEstimate:
    """Full hybrid assessment: word-bank stats + judge, fused.

    wb_statistic selects which word-bank statistic feeds the fusion
    ("median" or "average"). A judge failure degrades to word-bank-only.
    """
    if wb_statistic not in ("median", "average"):
        raise ValueError(f"unknown wb_statistic {wb_statistic!r}")
    score = wordbank_score(bank, text)
    wb_level = score.median_level if wb_statistic == "median" else score.average_level

    degraded = False
    llm_level: Optional[float] = None
    try:
        llm_level = llm_level_estimate(provider, text)
    except (ProviderError, UnparsableJudgeReply):
        degraded = True
    if wb_level is None and llm_level is None:
        raise NoSignal("no word-bank matches and judge unavailable")
    combined = fuse_levels(wb_level, llm_level, weights)
    return ProficiencyEstimate(
        wordbank=score,
        llm_level=llm_level,
        combined_level=combined,
        assessed_at=time.time(),
        input_chars=len(text),
        degraded=degraded,
    )
