"""Brute-force ground truth: every ONP strategy, every ordering.

Strategies are generated from the same prefix-test action space the DP
minimizes over, and costed by replaying all 2^n defect patterns, so nothing
here shares the DP's conditional-probability algebra.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Tuple

import numpy as np

from .data_types import (
    OrderingReport,
    ProbabilityVector,
    TooLarge,
    TooSmall,
    UnknownPolicy,
)
from .dp import optimal_onp
from .gpta import gpta_expected_any_order
from .model import all_patterns, pattern_matrix, pattern_probabilities, sort_nondecreasing
from .strategy import DONE, StrategyNode, StrategyTree, replay_strategy

logger = logging.getLogger(__name__)

STRATEGY_CAP = 5
ORDERING_CAP = 8
ORDERING_TIE = 1e-12
ORDERING_POLICIES = ("gpta", "dp_optimal")


class OnpMinimum(NamedTuple):
    minimum: float
    minimizers: int
    strategies: int
    tree: StrategyTree


@lru_cache(maxsize=None)
def _binomial_count(remaining: int) -> int:
    if remaining == 0:
        return 1
    return sum(
        _binomial_count(remaining - k) * _contaminated_count(k, remaining - k)
        for k in range(1, remaining + 1)
    )


@lru_cache(maxsize=None)
def _contaminated_count(length: int, after: int) -> int:
    if length == 1:
        return _binomial_count(after)
    return sum(
        _contaminated_count(m, after + length - m) * _contaminated_count(length - m, after)
        for m in range(1, length)
    )


def strategy_count(n: int) -> int:
    """Number of ONP strategy trees on n units, by counting alone."""
    if n < 0:
        raise TooSmall(n, 0)
    return _binomial_count(n)


def _check_cap(n: int) -> None:
    if n < 1:
        raise TooSmall(n, 1)
    if n > STRATEGY_CAP:
        raise TooLarge(n, STRATEGY_CAP)


# Shared by enumeration, decoding and the count matrices: the options of a
# state are its tests in increasing order, and each test's subtrees run
# pure-outer, contaminated-inner.


def _binomial_options(i: int, n: int):
    for k in range(i, n + 1):
        yield (i, k), ("b", k + 1), ("c", i, k)


def _contaminated_options(i: int, j: int):
    for m in range(i, j):
        yield (i, m), ("c", m + 1, j), ("c", i, m)


def _options(state, n: int):
    if state[0] == "b":
        return _binomial_options(state[1], n)
    return _contaminated_options(state[1], state[2])


def _resolve(state):
    """Contaminated singletons need no test: they hand play to the suffix."""
    if state[0] == "c" and state[1] == state[2]:
        return ("b", state[1] + 1)
    return state


def _count(state, n: int) -> int:
    state = _resolve(state)
    if state[0] == "b":
        return _binomial_count(n - state[1] + 1)
    return _contaminated_count(state[2] - state[1] + 1, n - state[2])


def _strategies(state, n: int) -> Iterator[StrategyTree]:
    state = _resolve(state)
    if state == ("b", n + 1):
        yield DONE
        return
    for (first, last), pure_state, contaminated_state in _options(state, n):
        for pure in _strategies(pure_state, n):
            for contaminated in _strategies(contaminated_state, n):
                yield StrategyNode(first, last, pure=pure, contaminated=contaminated)


def enumerate_onp_strategies(n: int) -> Iterator[StrategyTree]:
    """Every ONP strategy tree on n units, each exactly once."""
    _check_cap(n)
    return _strategies(("b", 1), n)


def strategy_at(n: int, index: int) -> StrategyTree:
    """The index-th tree of enumerate_onp_strategies(n), decoded without enumerating."""
    _check_cap(n)
    if not 0 <= index < strategy_count(n):
        raise IndexError(f"strategy index {index} out of range for n = {n}")

    def decode(state, r: int) -> StrategyTree:
        state = _resolve(state)
        if state == ("b", n + 1):
            return DONE
        for (first, last), pure_state, contaminated_state in _options(state, n):
            inner = _count(contaminated_state, n)
            block = _count(pure_state, n) * inner
            if r < block:
                a, b = divmod(r, inner)
                return StrategyNode(
                    first,
                    last,
                    pure=decode(pure_state, a),
                    contaminated=decode(contaminated_state, b),
                )
            r -= block
        raise AssertionError("strategy index decoding overran its state")

    return decode(("b", 1), index)


@lru_cache(maxsize=STRATEGY_CAP)
def _count_matrix(n: int) -> np.ndarray:
    """Tests used by every strategy (rows, enumeration order) on every pattern (columns)."""
    patterns = pattern_matrix(n)
    memo = {}

    def contaminated_mask(first: int, last: int) -> np.ndarray:
        return patterns[:, first - 1 : last].any(axis=1)

    def counts(state) -> np.ndarray:
        state = _resolve(state)
        if state in memo:
            return memo[state]
        if state == ("b", n + 1):
            result = np.zeros((1, patterns.shape[0]), dtype=np.int8)
        else:
            blocks = []
            for (first, last), pure_state, contaminated_state in _options(state, n):
                pure = counts(pure_state)
                contaminated = counts(contaminated_state)
                mask = contaminated_mask(first, last)
                block = 1 + np.where(mask[None, None, :], contaminated[None, :, :], pure[:, None, :])
                blocks.append(block.reshape(-1, patterns.shape[0]).astype(np.int8))
            result = np.concatenate(blocks, axis=0)
        memo[state] = result
        return result

    matrix = counts(("b", 1)).astype(np.float64)
    logger.debug(f"Built test-count matrix for n={n}: {matrix.shape[0]} strategies")
    return matrix


def exact_strategy_cost(t: StrategyTree, v: ProbabilityVector) -> float:
    """Expected number of tests of t over all 2^n patterns, by replay.

    Raises:
        InvalidTree: t breaks the ordered nested rules for n units
    """
    probs = pattern_probabilities(v)
    terms = [
        float(prob) * len(replay_strategy(t, bits).tests)
        for prob, bits in zip(probs, all_patterns(v.n))
    ]
    return math.fsum(terms)


def exhaustive_onp_minimum(v: ProbabilityVector, tol: float = 1e-12) -> OnpMinimum:
    """Minimum expected cost over every ONP strategy, with the number of minimizers."""
    _check_cap(v.n)
    costs = _count_matrix(v.n) @ pattern_probabilities(v)
    best = int(np.argmin(costs))
    minimum = float(costs[best])
    minimizers = int(np.count_nonzero(costs <= minimum + tol))
    return OnpMinimum(
        minimum=minimum,
        minimizers=minimizers,
        strategies=int(costs.shape[0]),
        tree=strategy_at(v.n, best),
    )


def _ordering_cost(args: Tuple[str, Tuple[float, ...]]) -> float:
    policy, p = args
    if policy == "gpta":
        return gpta_expected_any_order(p)
    _, cost = optimal_onp(ProbabilityVector(p=p), require_sorted=False)
    return cost


def best_ordering_bruteforce(
    v: ProbabilityVector, policy: str = "gpta", workers: int = 1
) -> OrderingReport:
    """Cheapest of all n! orderings of v under the policy.

    Orderings are visited in lexicographic order; a later ordering replaces
    the incumbent only when cheaper by more than ORDERING_TIE.
    """
    if policy not in ORDERING_POLICIES:
        raise UnknownPolicy(policy)
    if v.n > ORDERING_CAP:
        raise TooLarge(v.n, ORDERING_CAP)
    permutations: List[Tuple[int, ...]] = list(itertools.permutations(range(v.n)))
    jobs = [(policy, tuple(v.p[i] for i in perm)) for perm in permutations]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(_ordering_cost, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        costs = [_ordering_cost(job) for job in jobs]

    best_index = 0
    for index, cost in enumerate(costs):
        if cost < costs[best_index] - ORDERING_TIE:
            best_index = index
    _, sorted_permutation = sort_nondecreasing(v)
    sorted_cost = _ordering_cost((policy, tuple(v.p[i - 1] for i in sorted_permutation)))
    logger.info(f"Searched {len(permutations)} orderings under {policy}")
    return OrderingReport(
        policy=policy,
        permutation=tuple(i + 1 for i in permutations[best_index]),
        cost=costs[best_index],
        given_order_cost=costs[0],
        sorted_order_cost=sorted_cost,
        orderings=len(permutations),
    )

