"""
Unit tests for the exact dynamic program over ordered nested procedures.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.pgt_modules.data_types import (
    IndexOutOfRange,
    LengthMismatch,
    NotSorted,
    ProbabilityVector,
    TooSmall,
)
from scripts.pgt_modules.dp import (
    extract_strategy,
    first_action_costs,
    individual_testing_optimal,
    individual_testing_threshold,
    is_gpta_optimal,
    optimal_onp,
    step1_competitor_bound,
)
from scripts.pgt_modules.gpta import delta_recursive, expected_tests_gpta, gpta_strategy
from scripts.pgt_modules.model import homogeneous
from scripts.pgt_modules.oracle import exact_strategy_cost
from scripts.pgt_modules.strategy import validate_strategy

GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0
LOWER = 1.0 - 1.0 / math.sqrt(2.0)

interval_vectors = st.lists(
    st.floats(min_value=LOWER + 1e-6, max_value=GOLDEN - 1e-6), min_size=2, max_size=10
).map(lambda xs: ProbabilityVector(p=sorted(xs)))


class TestOptimalOnp:
    def test_single_unit(self):
        tables, cost = optimal_onp(ProbabilityVector(p=[0.3]))

        assert cost == 1.0
        assert tables.G(2) == 0.0

    def test_pair_above_interval_prefers_singletons(self):
        tables, cost = optimal_onp(ProbabilityVector(p=[0.45, 0.45]))

        assert cost == pytest.approx(2.0)
        assert int(tables.arg_g[1]) == 1
        assert tables.g_candidates[1] == pytest.approx([2.0, 2.1475])

    def test_contaminated_singleton_hands_over(self, three_at_030):
        tables, _ = optimal_onp(three_at_030)

        for i in range(1, 4):
            assert tables.H(i, i) == tables.G(i + 1)

    def test_tables_are_read_only(self, three_at_030):
        tables, _ = optimal_onp(three_at_030)

        with pytest.raises(ValueError):
            tables.g[1] = 0.0

    def test_accessor_bounds(self, three_at_030):
        tables, _ = optimal_onp(three_at_030)

        with pytest.raises(IndexOutOfRange):
            tables.G(5)
        with pytest.raises(IndexOutOfRange):
            tables.H(3, 2)

    def test_unsorted_rejected_unless_allowed(self):
        v = ProbabilityVector(p=[0.35, 0.30])

        with pytest.raises(NotSorted):
            optimal_onp(v)
        _, cost = optimal_onp(v, require_sorted=False)
        assert cost > 0

    def test_never_worse_than_gpta(self, sorted_mixed):
        _, cost = optimal_onp(sorted_mixed)

        assert cost <= expected_tests_gpta(sorted_mixed) + 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_tiny_probabilities_stay_finite(self, n):
        # q = 1 - 1e-17 rounds to exactly 1.0
        v = ProbabilityVector(p=[1e-17] * n)

        tables, cost = optimal_onp(v)

        assert np.all(np.isfinite(tables.h))
        assert cost == pytest.approx(1.0)
        assert cost <= expected_tests_gpta(v) + 1e-12

    def test_tiny_pair_verdict(self):
        verdict = is_gpta_optimal(ProbabilityVector(p=[1e-17, 1e-17]))

        assert verdict.dp_cost == pytest.approx(1.0)
        assert verdict.gpta_cost == pytest.approx(1.0)
        assert verdict.verdict != "suboptimal"


class TestExtractStrategy:
    def test_extracted_tree_costs_the_optimum(self, sorted_mixed):
        tables, cost = optimal_onp(sorted_mixed)

        tree = extract_strategy(tables)

        validate_strategy(tree, sorted_mixed.n)
        assert exact_strategy_cost(tree, sorted_mixed) == pytest.approx(cost, abs=1e-12)

    def test_interval_tree_is_gpta(self, three_at_030):
        tables, _ = optimal_onp(three_at_030)

        assert extract_strategy(tables) == gpta_strategy(three_at_030)

    def test_vector_argument_is_checked_against_tables(self, three_at_030):
        tables, _ = optimal_onp(three_at_030)

        assert extract_strategy(tables, three_at_030) == extract_strategy(tables)
        with pytest.raises(LengthMismatch):
            extract_strategy(tables, homogeneous(4, 0.3))

    def test_high_probabilities_give_singleton_chain(self):
        tables, cost = optimal_onp(homogeneous(4, 0.5))

        tree = extract_strategy(tables)

        assert cost == pytest.approx(4.0)
        node = tree
        for unit in range(1, 5):
            assert (node.first, node.last) == (unit, unit)
            node = node.pure


class TestVerdict:
    def test_optimal_and_unique_inside_interval(self):
        verdict = is_gpta_optimal(ProbabilityVector(p=[0.30, 0.31, 0.35]))

        assert verdict.verdict == "optimal_and_unique"
        assert verdict.first_move == 2
        assert abs(verdict.gap) <= 1e-9

    def test_suboptimal_above_interval(self):
        verdict = is_gpta_optimal(ProbabilityVector(p=[0.45, 0.45]))

        assert verdict.verdict == "suboptimal"
        assert verdict.gap == pytest.approx(0.1475)
        assert verdict.dp_cost == pytest.approx(2.0)

    def test_tie_at_the_upper_endpoint(self):
        verdict = is_gpta_optimal(homogeneous(2, GOLDEN))

        assert verdict.verdict == "optimal_not_unique"

    def test_single_unit_is_trivially_unique(self):
        assert is_gpta_optimal(ProbabilityVector(p=[0.3])).verdict == "optimal_and_unique"

    def test_unsorted_rejected(self):
        with pytest.raises(NotSorted):
            is_gpta_optimal(ProbabilityVector(p=[0.35, 0.30]))

    @settings(max_examples=60, deadline=None)
    @given(v=interval_vectors)
    def test_unique_optimum_inside_interval(self, v):
        verdict = is_gpta_optimal(v)

        assert verdict.verdict == "optimal_and_unique"
        assert verdict.gpta_cost == pytest.approx(verdict.dp_cost, abs=1e-10)


class TestFirstActions:
    def test_first_action_gap_is_one_minus_delta(self, sorted_mixed):
        costs = dict(first_action_costs(sorted_mixed))

        delta = delta_recursive(sorted_mixed).values[0]
        assert costs[1] - costs[2] == pytest.approx(1.0 - delta, abs=1e-10)
        for k in range(3, sorted_mixed.n + 1):
            assert costs[k] > costs[2]

    def test_needs_two_units(self):
        with pytest.raises(TooSmall):
            first_action_costs(ProbabilityVector(p=[0.3]))

    def test_step1_bound(self, three_at_030):
        assert step1_competitor_bound(three_at_030, 3) == pytest.approx(0.7 * (1.0 - 2.0 * 0.49))

    def test_step1_bound_positive_inside_interval(self, sorted_mixed):
        for k in range(3, sorted_mixed.n + 1):
            assert step1_competitor_bound(sorted_mixed, k) > 0.0

    @pytest.mark.parametrize("k", [2, 6])
    def test_step1_bound_index(self, sorted_mixed, k):
        with pytest.raises(IndexOutOfRange):
            step1_competitor_bound(sorted_mixed, k)


class TestIndividualTesting:
    def test_threshold(self):
        assert individual_testing_threshold(ProbabilityVector(p=[0.3, 0.3])) == pytest.approx(1.81)

    def test_individual_testing_regime(self):
        v = ProbabilityVector(p=[0.45, 0.45])

        assert individual_testing_optimal(v)
        assert not individual_testing_optimal(ProbabilityVector(p=[0.3, 0.3]))

    def test_threshold_needs_two_units(self):
        with pytest.raises(TooSmall):
            individual_testing_threshold(ProbabilityVector(p=[0.3]))

    @settings(max_examples=40, deadline=None)
    @given(
        xs=st.lists(st.floats(min_value=0.40, max_value=0.95), min_size=2, max_size=8)
    )
    def test_dp_equals_n_for_high_probabilities(self, xs):
        v = ProbabilityVector(p=sorted(xs))

        _, cost = optimal_onp(v)

        assert cost == pytest.approx(v.n, abs=1e-10)
        assert np.isfinite(cost)
