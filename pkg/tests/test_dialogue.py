import threading

import pytest

from conftest import ANALYSIS_REPLY, make_mock
from tutor.dialogue import DEFAULT_TRIGGERS, Engine, EngineConfig, detect_exercise
from tutor.errors import Busy, ProviderError, SessionClosed, UnknownLearner
from tutor.provider import FailingProvider
from tutor.store import Store
from tutor.wordbank import WordBank


DETECTION_TABLE = [
    ("Fill in the blank: She ___ to school every day.", "fill_in_blank"),
    ("Let's practice! Fill in the blank: I drink ___ every morning.", "fill_in_blank"),
    ("Complete the sentence: Yesterday I ___ to the market.", "fill_in_blank"),
    ("Now complete the sentence with the right tense.", "fill_in_blank"),
    ("Rewrite the sentence: 'me and him goes'", "rewrite"),
    ("Good try! Rewrite the sentence using past tense.", "rewrite"),
    ("Choose the correct option: (a) go (b) goes", "multiple_choice"),
    ("Which of the following is polite? 1) gimme 2) could I have", "multiple_choice"),
    ("Your task is to describe your morning routine.", "free_response"),
    ("Try this exercise: order a coffee politely.", "free_response"),
    ("FILL IN THE BLANK: case should not matter.", "fill_in_blank"),
    ("Great job! Now try this exercise. Rewrite the sentence below.", "free_response"),
    ("The weather is lovely today, isn't it?", None),
    ("Let me explain articles: 'a' goes before consonant sounds.", None),
    ("You could fill your notebook with examples.", None),
    ("That's correct! Well done.", None),
    ("Tell me about your weekend.", None),
    ("Here is a blank page metaphor, nothing to solve.", None),
    ("Rewrite history? That's just an expression.", None),
    ("Choose whatever topic you like.", None),
    ("Your task list sounds busy; your task is to relax tonight!", "free_response"),
    ("Which of the following days suits you: Monday or Tuesday?", "multiple_choice"),
    ("Fill in the blank spaces in your form.", "fill_in_blank"),
    ("Please complete the sentence: I feel ___ today.", "fill_in_blank"),
    ("Almost! Choose the correct article: ___ apple.", "multiple_choice"),
    ("A quick one. Which of the following is a verb: run, blue, happy?", "multiple_choice"),
    ("Try this exercise before our next chat.", "free_response"),
    ("Nothing to do here, just chatting.", None),
    ("I like your rewriting of that paragraph.", None),
    ("blank blank blank", None),
]


class TestDetectExercise:
    @pytest.mark.parametrize("text,expected", DETECTION_TABLE)
    def test_table(self, text, expected):
        result = detect_exercise(text)
        if expected is None:
            assert result is None
        else:
            assert result == (expected, text)

    def test_earliest_match_wins(self):
        text = "Rewrite the sentence below, or fill in the blank if easier."
        assert detect_exercise(text)[0] == "rewrite"

    def test_custom_triggers(self):
        result = detect_exercise("Solve this puzzle now", (("solve this", "free_response"),))
        assert result[0] == "free_response"
        assert detect_exercise("Fill in the blank", (("solve this", "free_response"),)) is None


@pytest.fixture
def store(tmp_path):
    s = Store(str(tmp_path / "t.db"))
    yield s
    s.close()


@pytest.fixture
def learner(store):
    return store.create_learner("yuki@example.org", "Yuki")


def _engine(store, provider, bank=None, catalog=None, config=None):
    return Engine(
        store=store,
        provider=provider,
        bank=bank or WordBank(entries={"coffee": 2, "want": 1, "please": 3}),
        catalog=catalog,
        config=config or EngineConfig(),
    )


ORDERING_COFFEE_SCRIPT = dict(
    tutor_reply=[
        "Hi Yuki! What would you like to practise today?",
        "Great! Fill in the blank: I would like ___ coffee, please.",
        "Nice work today. Anything else?",
    ],
    exercise_feedback=[
        "Well done! 'a coffee' is right. Remember the article before 'coffee'.",
    ],
    level_judge=["6"],
    improvement_analysis=[ANALYSIS_REPLY],
    session_summary=["You practised ordering coffee politely."],
)


class TestSessionLifecycle:
    def test_start_session(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        record = store.get_session(learner.learner_id, session_id)
        assert record["messages"] == []
        assert record["ended_at"] is None

    def test_unknown_learner(self, store):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        with pytest.raises(UnknownLearner):
            engine.start_session("ghost")

    def test_two_starts_two_ids(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        assert engine.start_session(learner.learner_id) != engine.start_session(learner.learner_id)

    def test_end_session_stores_summary(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        engine.handle_learner_message(learner.learner_id, session_id, "hello")
        summary = engine.end_session(learner.learner_id, session_id)
        assert summary.summary == "You practised ordering coffee politely."
        assert not summary.degraded
        assert store.get_session(learner.learner_id, session_id)["ended_at"] is not None

    def test_end_twice_raises(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        engine.end_session(learner.learner_id, session_id)
        with pytest.raises(SessionClosed):
            engine.end_session(learner.learner_id, session_id)

    def test_summary_failure_closes_with_degraded_placeholder(self, store, learner):
        engine = _engine(store, FailingProvider())
        session_id = engine.start_session(learner.learner_id)
        summary = engine.end_session(learner.learner_id, session_id)
        assert summary.degraded
        record = store.get_session(learner.learner_id, session_id)
        assert record["ended_at"] is not None
        assert record["summary"]

    def test_message_to_closed_session(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        engine.end_session(learner.learner_id, session_id)
        with pytest.raises(SessionClosed):
            engine.handle_learner_message(learner.learner_id, session_id, "hi")


class TestTurnFlow:
    def test_exercise_issue_then_complete(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)

        r1 = engine.handle_learner_message(learner.learner_id, session_id, "i want coffee")
        assert r1.exercise_event is None

        r2 = engine.handle_learner_message(learner.learner_id, session_id, "practise ordering")
        assert r2.exercise_event["kind"] == "issued"
        assert r2.exercise_event["exercise_type"] == "fill_in_blank"

        r3 = engine.handle_learner_message(learner.learner_id, session_id, "I would like a coffee")
        assert r3.exercise_event["kind"] == "completed"
        assert r3.assistant_reply.startswith("Well done!")
        exercises = store.get_session(learner.learner_id, session_id)["exercises"]
        assert [e["state"] for e in exercises] == ["completed"]

    def test_at_most_one_active_exercise(self, store, learner):
        script = dict(ORDERING_COFFEE_SCRIPT)
        script["tutor_reply"] = [
            "Fill in the blank: one ___.",
        ]
        engine = _engine(store, make_mock(**script))
        session_id = engine.start_session(learner.learner_id)
        engine.handle_learner_message(learner.learner_id, session_id, "hi")
        # second learner message becomes the attempt; feedback completes it
        r2 = engine.handle_learner_message(learner.learner_id, session_id, "answer")
        assert r2.exercise_event["kind"] == "completed"
        exercises = store.get_session(learner.learner_id, session_id)["exercises"]
        assert sum(1 for e in exercises if e["state"] != "completed") <= 1

    def test_analysis_triggers_on_third_learner_message(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        r1 = engine.handle_learner_message(learner.learner_id, session_id, "one")
        r2 = engine.handle_learner_message(learner.learner_id, session_id, "two")
        assert r1.analysis_event is None
        assert r2.analysis_event is None
        r3 = engine.handle_learner_message(learner.learner_id, session_id, "three")
        assert r3.analysis_event is not None
        assert [a.area for a in r3.analysis_event] == ["Articles", "Tenses"]

    def test_failed_analysis_retriggers_next_message(self, store, learner):
        script = dict(ORDERING_COFFEE_SCRIPT)
        script["improvement_analysis"] = ["not json at all", ANALYSIS_REPLY]
        script["tutor_reply"] = ["plain reply"]
        engine = _engine(store, make_mock(**script))
        session_id = engine.start_session(learner.learner_id)
        for _ in range(2):
            engine.handle_learner_message(learner.learner_id, session_id, "msg")
        r3 = engine.handle_learner_message(learner.learner_id, session_id, "msg")
        assert r3.analysis_event is None  # parse failed, watermark not advanced
        r4 = engine.handle_learner_message(learner.learner_id, session_id, "msg")
        assert r4.analysis_event is not None

    def test_proficiency_cadence_every_third_message(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        results = [
            engine.handle_learner_message(learner.learner_id, session_id, "i want coffee please")
            for _ in range(4)
        ]
        assert [r.proficiency_event is not None for r in results] == [False, False, True, False]

    def test_provider_failure_is_atomic(self, store, learner):
        engine = _engine(store, FailingProvider())
        session_id = engine.start_session(learner.learner_id)
        with pytest.raises(ProviderError):
            engine.handle_learner_message(learner.learner_id, session_id, "hello")
        record = store.get_session(learner.learner_id, session_id)
        assert [m["role"] for m in record["messages"]] == ["learner"]
        assert record["exercises"] == []
        assert record["estimates"] == []

    def test_history_alternates_after_successful_turns(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        for text in ["a", "b", "c"]:
            engine.handle_learner_message(learner.learner_id, session_id, text)
        roles = [m["role"] for m in store.get_session(learner.learner_id, session_id)["messages"]]
        assert roles == ["learner", "assistant"] * 3

    def test_concurrent_turn_rejected_busy(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        lock = engine._session_lock(session_id)
        lock.acquire()
        try:
            with pytest.raises(Busy):
                engine.handle_learner_message(learner.learner_id, session_id, "hi")
        finally:
            lock.release()

    def test_empty_message_rejected(self, store, learner):
        engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
        session_id = engine.start_session(learner.learner_id)
        with pytest.raises(ValueError):
            engine.handle_learner_message(learner.learner_id, session_id, "   ")


class TestReproducibility:
    def test_transcript_reproducible_across_runs(self, tmp_path, frozen_clock):
        def run(i):
            frozen_clock["now"] = 1_700_000_000.0
            store = Store(str(tmp_path / f"run{i}.db"))
            learner = store.create_learner("yuki@example.org", "Yuki")
            engine = _engine(store, make_mock(**ORDERING_COFFEE_SCRIPT))
            session_id = engine.start_session(learner.learner_id)
            for text in ["hello", "i want practise", "I would like a coffee"]:
                engine.handle_learner_message(learner.learner_id, session_id, text)
            engine.end_session(learner.learner_id, session_id)
            transcript = store.export_transcript(learner.learner_id, session_id, "text")
            store.close()
            return transcript.encode()

        first = run(0)
        assert first  # non-empty
        assert run(1) == first
        assert run(2) == first
