import csv
import pathlib

import pytest

from tutor.provider import PromptKind, ScriptedMockProvider
from tutor.wordbank import WordBank

DATA_DIR = pathlib.Path(__file__).parent / "data"

ANALYSIS_REPLY = (
    '[{"area": "Articles", "confidence": 0.8, "examples": ["I want coffee"]},'
    ' {"area": "Tenses", "confidence": 0.5, "examples": ["I goed there"]},'
    ' {"area": "Punctuation", "confidence": 0.2, "examples": ["no commas"]}]'
)


@pytest.fixture
def small_bank():
    return WordBank(entries={
        "ability": 1, "coffee": 2, "want": 1, "please": 3, "order": 4,
        "study": 5, "run": 2, "weather": 6, "consider": 9, "nevertheless": 12,
    })


@pytest.fixture
def lemma_oracle():
    with open(DATA_DIR / "lemma_oracle.csv") as fh:
        return [(row["inflected"], row["lemma"]) for row in csv.DictReader(fh)]


def make_mock(**kind_replies):
    """Helper: make_mock(tutor_reply=[...], level_judge=[...])."""
    fixtures = {PromptKind(k): v for k, v in kind_replies.items()}
    return ScriptedMockProvider(fixtures)


@pytest.fixture
def frozen_clock(monkeypatch):
    """Deterministic timestamps for byte-reproducible transcripts."""
    state = {"now": 1_700_000_000.0}

    def tick():
        state["now"] += 1.0
        return state["now"]

    import tutor.analysis
    import tutor.scoring
    import tutor.store

    monkeypatch.setattr(tutor.store.time, "time", tick)
    monkeypatch.setattr(tutor.scoring.time, "time", tick)
    monkeypatch.setattr(tutor.analysis.time, "time", tick)
    return state
