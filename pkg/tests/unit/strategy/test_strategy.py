"""
Unit tests for strategy trees: replay, validation and the JSON form.
"""

import pytest

from scripts.pgt_modules.data_types import InvalidTree
from scripts.pgt_modules.strategy import (
    DONE,
    StrategyNode,
    count_tests,
    first_test,
    replay_strategy,
    strategy_from_json,
    strategy_to_json,
    strategy_units,
    validate_strategy,
)


def singleton_chain(n: int):
    tree = DONE
    for unit in range(n, 0, -1):
        tree = StrategyNode(unit, unit, pure=tree, contaminated=tree)
    return tree


def pair_then_split():
    """Pair test on two units; on contamination test unit 1."""
    tail = StrategyNode(2, 2, pure=DONE, contaminated=DONE)
    split = StrategyNode(1, 1, pure=DONE, contaminated=tail)
    return StrategyNode(1, 2, pure=DONE, contaminated=split)


class TestReplay:
    def test_singleton_chain_tests_every_unit(self):
        trace = replay_strategy(singleton_chain(3), (True, False, True))

        assert [units for units, _ in trace.tests] == [(0,), (1,), (2,)]
        assert trace.classification == [True, False, True]

    @pytest.mark.parametrize(
        "bits, expected_tests",
        [
            ((False, False), 1),
            ((False, True), 2),
            ((True, False), 3),
            ((True, True), 3),
        ],
    )
    def test_pair_then_split(self, bits, expected_tests):
        trace = replay_strategy(pair_then_split(), bits)

        assert len(trace.tests) == expected_tests
        assert trace.classification == list(bits)

    def test_contaminated_singleton_is_inferred(self):
        # Pure unit 1 inside a contaminated pair makes unit 2 defective
        trace = replay_strategy(pair_then_split(), (False, True))

        assert trace.tests[-1] == ((0,), False)
        assert trace.classification[1] is True

    def test_early_leaf_rejected(self):
        tree = StrategyNode(1, 1, pure=DONE, contaminated=DONE)

        with pytest.raises(InvalidTree):
            replay_strategy(tree, (False, False))

    def test_non_prefix_test_rejected(self):
        tree = StrategyNode(2, 2, pure=DONE, contaminated=DONE)

        with pytest.raises(InvalidTree):
            replay_strategy(tree, (False, False))

    def test_whole_contaminated_segment_retest_rejected(self):
        # Retesting 1..2 after it read contaminated is not a proper prefix
        tree = StrategyNode(1, 2, pure=DONE, contaminated=StrategyNode(1, 2, pure=DONE, contaminated=DONE))

        with pytest.raises(InvalidTree):
            replay_strategy(tree, (True, True))


class TestValidate:
    def test_valid_trees(self):
        validate_strategy(singleton_chain(4), 4)
        validate_strategy(pair_then_split(), 2)

    def test_wrong_unit_count(self):
        with pytest.raises(InvalidTree):
            validate_strategy(pair_then_split(), 3)

    def test_test_beyond_units(self):
        with pytest.raises(InvalidTree):
            validate_strategy(StrategyNode(1, 3, pure=DONE, contaminated=DONE), 2)


class TestHelpers:
    def test_counts_and_first_test(self):
        tree = pair_then_split()

        assert count_tests(tree) == 3
        assert first_test(tree) == (1, 2)
        assert first_test(DONE) is None
        assert strategy_units(tree) == 2
        assert strategy_units(singleton_chain(5)) == 5


class TestJson:
    def test_schema(self):
        data = strategy_to_json(StrategyNode(1, 1, pure=DONE, contaminated=DONE))

        assert data == {
            "test": {"from": 1, "to": 1},
            "pure": {"done": True},
            "contam": {"done": True},
        }

    def test_round_trip(self):
        tree = pair_then_split()

        assert strategy_from_json(strategy_to_json(tree)) == tree

    @pytest.mark.parametrize("data", [[], {"test": {"from": 1}}, {"test": {"from": "a", "to": 1}}])
    def test_malformed_json(self, data):
        with pytest.raises(InvalidTree):
            strategy_from_json(data)
