"""
Unit tests for the brute-force strategy and ordering oracles.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.pgt_modules.data_types import (
    InvalidTree,
    ProbabilityVector,
    TooLarge,
    TooSmall,
    UnknownPolicy,
)
from scripts.pgt_modules.dp import optimal_onp
from scripts.pgt_modules.gpta import expected_tests_gpta, gpta_expected_any_order
from scripts.pgt_modules.model import homogeneous
from scripts.pgt_modules.oracle import (
    best_ordering_bruteforce,
    enumerate_onp_strategies,
    exact_strategy_cost,
    exhaustive_onp_minimum,
    strategy_at,
    strategy_count,
)
from scripts.pgt_modules.strategy import DONE, StrategyNode, validate_strategy


class TestStrategyCounts:
    @pytest.mark.parametrize("n, count", [(0, 1), (1, 1), (2, 2), (3, 10), (4, 280), (5, 235200)])
    def test_counting_recursion(self, n, count):
        assert strategy_count(n) == count

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_enumeration_matches_count(self, n):
        trees = list(enumerate_onp_strategies(n))

        assert len(trees) == strategy_count(n)
        assert len(set(trees)) == len(trees)

    @pytest.mark.parametrize("n", [2, 3])
    def test_every_enumerated_tree_is_valid(self, n):
        for tree in enumerate_onp_strategies(n):
            validate_strategy(tree, n)

    def test_decoding_matches_enumeration(self):
        trees = list(enumerate_onp_strategies(3))

        assert [strategy_at(3, i) for i in range(len(trees))] == trees

    def test_decoding_out_of_range(self):
        with pytest.raises(IndexError):
            strategy_at(2, 2)

    def test_caps(self):
        with pytest.raises(TooLarge):
            enumerate_onp_strategies(6)
        with pytest.raises(TooSmall):
            enumerate_onp_strategies(0)
        with pytest.raises(TooSmall):
            strategy_count(-1)


class TestExhaustiveMinimum:
    def test_two_units(self):
        result = exhaustive_onp_minimum(ProbabilityVector(p=[0.45, 0.45]))

        assert result.minimum == pytest.approx(2.0)
        assert result.strategies == 2
        assert result.minimizers == 1

    def test_running_example_is_gpta(self, three_at_030):
        result = exhaustive_onp_minimum(three_at_030)

        assert result.minimum == pytest.approx(expected_tests_gpta(three_at_030), abs=1e-12)
        assert result.minimizers == 1
        assert exact_strategy_cost(result.tree, three_at_030) == pytest.approx(result.minimum)

    def test_tie_at_the_upper_endpoint(self):
        result = exhaustive_onp_minimum(homogeneous(2, (3.0 - 5.0**0.5) / 2.0), tol=1e-12)

        assert result.minimizers == 2

    @settings(max_examples=30, deadline=None)
    @given(xs=st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=1, max_size=4))
    def test_matches_dynamic_program(self, xs):
        v = ProbabilityVector(p=sorted(xs))

        _, dp_cost = optimal_onp(v)

        assert exhaustive_onp_minimum(v).minimum == pytest.approx(dp_cost, abs=1e-12)

    def test_cost_of_invalid_tree(self, three_at_030):
        with pytest.raises(InvalidTree):
            exact_strategy_cost(StrategyNode(1, 1, pure=DONE, contaminated=DONE), three_at_030)


class TestOrderings:
    def test_gpta_orderings(self):
        # Arrange
        v = ProbabilityVector(p=[0.35, 0.30, 0.32])

        # Act
        report = best_ordering_bruteforce(v, policy="gpta")

        # Assert
        assert report.orderings == 6
        assert report.given_order_cost == pytest.approx(gpta_expected_any_order(v.p))
        assert report.sorted_order_cost == pytest.approx(
            expected_tests_gpta(ProbabilityVector(p=[0.30, 0.32, 0.35]))
        )
        assert report.cost <= min(report.given_order_cost, report.sorted_order_cost)
        assert sorted(report.permutation) == [1, 2, 3]

    def test_dp_orderings(self, sorted_mixed):
        report = best_ordering_bruteforce(ProbabilityVector(p=sorted_mixed.p[:4]), policy="dp_optimal")

        assert report.policy == "dp_optimal"
        assert report.orderings == 24
        assert report.cost <= report.sorted_order_cost + 1e-12

    def test_homogeneous_keeps_identity(self, three_at_030):
        report = best_ordering_bruteforce(three_at_030)

        assert report.permutation == (1, 2, 3)

    def test_unknown_policy(self, three_at_030):
        with pytest.raises(UnknownPolicy):
            best_ordering_bruteforce(three_at_030, policy="dorfman")

    def test_cap(self):
        with pytest.raises(TooLarge):
            best_ordering_bruteforce(homogeneous(9, 0.3))
