"""
Unit tests for the randomized property sweeps.
"""

import pytest

from scripts.pgt_modules.data_types import InputFormatError, ProbabilityVector, UnknownCheck
from scripts.pgt_modules.model import in_admissible_interval, is_sorted
from scripts.pgt_modules.verify import (
    CHECKS,
    run_check,
    sample_high,
    sample_in_interval,
    sample_weights,
)


class TestSamplers:
    def test_interval_samples_are_sorted_and_inside(self, rng):
        for n in range(1, 15):
            v = ProbabilityVector(p=sample_in_interval(rng, n))

            assert is_sorted(v)
            assert in_admissible_interval(v, "open")

    def test_high_samples(self, rng):
        assert min(sample_high(rng, 8)) >= 0.40

    def test_weights_are_positive(self, rng):
        assert all(w > 0 for w in sample_weights(rng, 12))


class TestRunCheck:
    @pytest.mark.parametrize(
        "name, trials",
        [
            ("lemma1", 200),
            ("theorem2", 50),
            ("lemma3", 100),
            ("hutucker", 50),
            ("dp-oracle", 10),
            ("dp-oracle-interval", 10),
            ("individual", 30),
            ("dorfman", 30),
            ("boundary", 49),
        ],
    )
    def test_checks_pass(self, name, trials):
        summary = run_check(name, trials=trials, seed=5)

        assert summary.failed == 0, summary.detail
        assert summary.passed == trials
        assert summary.ok
        assert summary.counterexample is None

    def test_registered_names(self):
        assert {"lemma1", "theorem2", "lemma3", "hutucker", "dp-oracle"} <= set(CHECKS)

    def test_same_seed_same_summary(self):
        assert run_check("lemma1", trials=20, seed=9) == run_check("lemma1", trials=20, seed=9)

    def test_n_range_is_clamped_to_the_check(self):
        summary = run_check("lemma3", trials=10, n_min=1, n_max=4, seed=1)

        assert summary.ok

    def test_n_max_above_the_cap_is_clamped(self):
        summary = run_check("lemma1", trials=10, n_max=500, seed=4)

        assert summary.ok
        assert summary.passed == 10

    @pytest.mark.parametrize("name, n_min, n_max", [("lemma3", None, 2), ("dp-oracle", 6, None)])
    def test_empty_n_range_rejected(self, name, n_min, n_max):
        with pytest.raises(InputFormatError):
            run_check(name, trials=3, n_min=n_min, n_max=n_max)

    def test_failing_predicate_reports_counterexample(self):
        # a negative tolerance turns every verdict into suboptimal
        summary = run_check("theorem2", trials=5, seed=2, n_min=2, n_max=2, tol=-1.0)

        assert summary.failed == 5
        assert summary.counterexample is not None
        assert len(summary.counterexample) == 2
        assert not summary.ok

    def test_unknown_check(self):
        with pytest.raises(UnknownCheck) as exc_info:
            run_check("lemma9")

        assert "lemma1" in str(exc_info.value)
