import random

import pytest
from hypothesis import given, strategies as st

from conftest import make_mock
from tutor.errors import NoSignal, UnparsableJudgeReply
from tutor.provider import PromptKind
from tutor.scoring import (
    FusionWeights,
    assess_proficiency,
    fuse_levels,
    llm_level_estimate,
    parse_judge_reply,
    wordbank_score,
)
from tutor.wordbank import WordBank


def brute_mean(values):
    return sum(values) / len(values)


def brute_median(values):
    ordered = sorted(values)
    n = len(ordered)
    if n % 2 == 1:
        return float(ordered[n // 2])
    return (ordered[n // 2 - 1] + ordered[n // 2]) / 2


class TestWordBankScore:
    def test_three_matches(self):
        bank = WordBank(entries={"a": 1, "b": 3, "c": 5})
        score = wordbank_score(bank, "a b c")
        assert score.average_level == 3.0
        assert score.median_level == 3.0
        assert score.coverage == 1.0

    def test_single_match(self):
        bank = WordBank(entries={"weather": 7})
        score = wordbank_score(bank, "weather zzz")
        assert score.average_level == 7.0
        assert score.median_level == 7.0
        assert score.coverage == 0.5

    def test_zero_matches(self):
        score = wordbank_score(WordBank(), "hello there")
        assert score.matched == ()
        assert score.average_level is None
        assert score.median_level is None
        assert score.coverage == 0.0

    def test_duplicates_counted_per_occurrence(self):
        bank = WordBank(entries={"run": 2})
        score = wordbank_score(bank, "run run run")
        assert len(score.matched) == 3

    def test_oracle_equivalence_500_random_texts(self):
        rng = random.Random(42)
        from tutor.wordbank import lemmatize

        candidates = [f"x{a}{b}" for a in "abcdefghijklmn" for b in "abcdefghijklmn"]
        vocabulary = [w for w in candidates if lemmatize(w) == w][:200]
        assert len(vocabulary) >= 150
        for _ in range(500):
            bank = WordBank(entries={
                w: rng.randint(1, 14) for w in rng.sample(vocabulary, rng.randint(1, 100))
            })
            text = " ".join(rng.choices(vocabulary, k=rng.randint(1, 60)))
            score = wordbank_score(bank, text)
            expected = [bank.entries[t] for t in text.split() if t in bank.entries]
            if expected:
                assert score.average_level == pytest.approx(brute_mean(expected), abs=0)
                assert score.median_level == pytest.approx(brute_median(expected), abs=0)
            else:
                assert score.average_level is None
            assert score.coverage == len(expected) / len(text.split())


JUDGE_REPLY_TABLE = [
    ("9", 9.0),
    ("12", 12.0),
    ("Level: 12 (advanced)", 12.0),
    ("7.5", 7.5),
    ("I would say 6 out of 14", 6.0),
    ("level=4", 4.0),
    ("  3  ", 3.0),
    ("The learner is at level 10.", 10.0),
    ("1", 1.0),
    ("14", 14.0),
    ("20", 14.0),          # clamped high
    ("0", 1.0),            # clamped low
    ("-2", 1.0),           # clamped low
    ("2.75 roughly", 2.75),
    ("Score 11/14", 11.0),
    ("between 5 and 7", 5.0),
    ("level\n8", 8.0),
    ("Answer: 13.", 13.0),
    ("9 (nine)", 9.0),
    ("Estimate is 4.0 on your scale", 4.0),
]


@pytest.mark.parametrize("reply,expected", JUDGE_REPLY_TABLE)
def test_judge_reply_parser_table(reply, expected):
    assert parse_judge_reply(reply) == expected


@pytest.mark.parametrize("reply", ["seventeen", "no idea", "", "N/A"])
def test_unparsable_judge_reply(reply):
    with pytest.raises(UnparsableJudgeReply):
        parse_judge_reply(reply)


def test_llm_level_estimate_via_mock():
    provider = make_mock(level_judge=["9"])
    assert llm_level_estimate(provider, "some text") == 9.0
    assert provider.calls[0].kind == PromptKind.LEVEL_JUDGE


class TestFuseLevels:
    def test_default_weights(self):
        assert fuse_levels(5, 10) == pytest.approx(8.0, abs=1e-9)

    def test_fixed_point(self):
        assert fuse_levels(7, 7, FusionWeights(0.25, 0.75)) == 7.0

    def test_single_source_renormalization(self):
        assert fuse_levels(None, 9) == 9.0
        assert fuse_levels(4.0, None) == 4.0

    def test_no_signal(self):
        with pytest.raises(NoSignal):
            fuse_levels(None, None)

    def test_degenerate_weights(self):
        assert fuse_levels(3, 12, FusionWeights(1.0, 0.0)) == 3.0
        assert fuse_levels(3, 12, FusionWeights(0.0, 1.0)) == 12.0

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            FusionWeights(0.5, 0.6)
        with pytest.raises(ValueError):
            FusionWeights(-0.1, 1.1)

    @given(
        st.floats(min_value=1, max_value=14),
        st.floats(min_value=1, max_value=14),
        st.floats(min_value=1, max_value=14),
    )
    def test_monotone_in_each_argument(self, wb, wb2, llm):
        lo, hi = sorted([wb, wb2])
        assert fuse_levels(lo, llm) <= fuse_levels(hi, llm)
        assert fuse_levels(llm, lo) <= fuse_levels(llm, hi)

    @given(
        st.floats(min_value=1, max_value=14),
        st.floats(min_value=1, max_value=14),
    )
    def test_convexity_bound(self, wb, llm):
        combined = fuse_levels(wb, llm)
        assert min(wb, llm) - 1e-12 <= combined <= max(wb, llm) + 1e-12


class TestAssessProficiency:
    def test_composition_matches_formula(self, small_bank):
        # matched levels {1, 3, 5} -> median 3.0; judge 10 -> 0.4*3 + 0.6*10
        bank = WordBank(entries={"a": 1, "b": 3, "c": 5})
        provider = make_mock(level_judge=["10"])
        estimate = assess_proficiency(bank, provider, "a b c")
        assert estimate.combined_level == pytest.approx(7.2, abs=1e-9)
        assert not estimate.degraded

    def test_judge_failure_degrades_to_wordbank(self):
        bank = WordBank(entries={"a": 4})
        provider = make_mock(tutor_reply=["x"])  # level_judge unscripted
        estimate = assess_proficiency(bank, provider, "a")
        assert estimate.combined_level == 4.0
        assert estimate.degraded

    def test_no_matches_uses_judge_only(self):
        provider = make_mock(level_judge=["2"])
        estimate = assess_proficiency(WordBank(), provider, "zzz qqq")
        assert estimate.combined_level == 2.0

    def test_no_signal_at_all(self):
        provider = make_mock(tutor_reply=["x"])
        with pytest.raises(NoSignal):
            assess_proficiency(WordBank(), provider, "zzz")

    def test_average_statistic_config(self):
        bank = WordBank(entries={"a": 1, "b": 3, "c": 14})
        provider = make_mock(level_judge=["10"])
        est_median = assess_proficiency(bank, provider, "a b c", wb_statistic="median")
        provider2 = make_mock(level_judge=["10"])
        est_average = assess_proficiency(bank, provider2, "a b c", wb_statistic="average")
        assert est_median.combined_level == pytest.approx(0.4 * 3 + 0.6 * 10, abs=1e-9)
        assert est_average.combined_level == pytest.approx(0.4 * 6 + 0.6 * 10, abs=1e-9)

    def test_deterministic_with_scripted_provider(self):
        bank = WordBank(entries={"a": 2, "b": 8})
        results = set()
        for _ in range(5):
            provider = make_mock(level_judge=["11"])
            estimate = assess_proficiency(bank, provider, "a b")
            results.add(estimate.combined_level)
        assert len(results) == 1
