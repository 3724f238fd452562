"""Randomized property sweeps behind `pgt verify`.

Every check draws its vectors from one Philox stream keyed by the seed, runs
a per-vector predicate, and reports pass/fail counts with the first failing
vector. Vectors said to be "in the interval" are drawn strictly inside the
open admissible interval and sorted.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .data_types import (
    AdmissibleInterval,
    InputFormatError,
    ProbabilityVector,
    UnknownCheck,
    VerifySummary,
    WeightVector,
)
from .dp import extract_strategy, first_action_costs, is_gpta_optimal, optimal_onp
from .gpta import (
    check_delta_lt_one,
    delta_closed_form,
    delta_recursive,
    expected_tests_gpta,
)
from .model import homogeneous
from .oat import (
    EXHAUSTIVE_CAP,
    check_lemma3_structure,
    exhaustive_alphabetic_cost,
    gilbert_moore_cost,
    hu_tucker,
    isolation_tree,
    lemma3_bound,
    tree_cost,
)
from .oracle import exhaustive_onp_minimum
from .sim import exhaustive_partition_minimum, hwang_optimal_partition
from .strategy import StrategyNode, StrategyTree

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-10
ORACLE_TOL = 1e-12

Sampler = Callable[[np.random.Generator, int], List[float]]
Predicate = Callable[[List[float], float], Optional[str]]


@dataclass(frozen=True)
class Check:
    name: str
    n_min: int
    n_max: int
    sample: Sampler
    predicate: Predicate
    description: str


def _interval() -> AdmissibleInterval:
    return AdmissibleInterval(openness="open")


def _interior(rng: np.random.Generator, n: int, lo: float, hi: float) -> List[float]:
    values = lo + (hi - lo) * rng.random(n)
    # rng.random() can return exactly 0, which would land on the closed end
    values = np.where(values <= lo, np.nextafter(lo, 1.0), values)
    return sorted(float(x) for x in values)


def sample_in_interval(rng: np.random.Generator, n: int) -> List[float]:
    interval = _interval()
    return _interior(rng, n, interval.lower, interval.upper)


def sample_unrestricted(rng: np.random.Generator, n: int) -> List[float]:
    return _interior(rng, n, 0.0, 1.0)


def sample_wide(rng: np.random.Generator, n: int) -> List[float]:
    return _interior(rng, n, 0.05, 0.95)


def sample_high(rng: np.random.Generator, n: int) -> List[float]:
    return _interior(rng, n, 0.40, 0.95)


def sample_weights(rng: np.random.Generator, n: int) -> List[float]:
    values = rng.random(n)
    values = np.where(values <= 0.0, 1e-12, values)
    return [float(x) for x in values]


def _lemma1(p: List[float], tol: float) -> Optional[str]:
    v = ProbabilityVector(p=p)
    if not check_delta_lt_one(v):
        return f"Delta_1:n = {delta_recursive(v).values[0]!r} is not below 1"
    recursive = delta_recursive(v).values
    for i in range(1, v.n + 1):
        closed = delta_closed_form(i, v)
        if abs(closed - recursive[i - 1]) > AGREEMENT_TOL:
            return f"closed form {closed!r} and recursion {recursive[i - 1]!r} differ at i={i}"
    return None


def _theorem2(p: List[float], tol: float) -> Optional[str]:
    v = ProbabilityVector(p=p)
    verdict = is_gpta_optimal(v, tol=tol)
    if verdict.verdict != "optimal_and_unique":
        return f"verdict {verdict.verdict} (gap {verdict.gap:.3e})"
    costs = dict(first_action_costs(v))
    delta = delta_recursive(v).values[0]
    if abs((costs[1] - costs[2]) - (1.0 - delta)) > AGREEMENT_TOL:
        return f"cost(1) - cost(2) = {costs[1] - costs[2]!r}, expected 1 - Delta = {1.0 - delta!r}"
    for k in range(3, v.n + 1):
        if not costs[k] > costs[2]:
            return f"forcing the first test onto 1..{k} is not worse than the pair"
    return None


def _lemma3(p: List[float], tol: float) -> Optional[str]:
    v = ProbabilityVector(p=p)
    tree, _ = isolation_tree(v)
    if not check_lemma3_structure(tree):
        return "isolation tree violates the last-two-siblings structure"
    bound = lemma3_bound(v)
    if not bound < 1.0:
        return f"bound {bound!r} is not below 1"
    return None


def _hutucker(w: List[float], tol: float) -> Optional[str]:
    weights = WeightVector(w=w)
    built = tree_cost(hu_tucker(weights), weights)
    optimum = gilbert_moore_cost(weights)
    if abs(built - optimum) > AGREEMENT_TOL:
        return f"Hu-Tucker cost {built!r} differs from interval optimum {optimum!r}"
    if weights.n <= EXHAUSTIVE_CAP:
        brute = exhaustive_alphabetic_cost(weights)
        if abs(built - brute) > AGREEMENT_TOL:
            return f"Hu-Tucker cost {built!r} differs from exhaustive optimum {brute!r}"
    return None


def _dp_oracle_one(v: ProbabilityVector, tol: float, compare_uniqueness: bool) -> Optional[str]:
    _, dp_cost = optimal_onp(v)
    oracle = exhaustive_onp_minimum(v, tol=ORACLE_TOL)
    if abs(oracle.minimum - dp_cost) > ORACLE_TOL:
        return f"oracle minimum {oracle.minimum!r} differs from DP {dp_cost!r}"
    if compare_uniqueness:
        unique = is_gpta_optimal(v, tol=tol).verdict == "optimal_and_unique"
        if unique != (oracle.minimizers == 1):
            return f"{oracle.minimizers} minimizing strategies but uniqueness verdict {unique}"
    return None


def _dp_oracle(p: List[float], tol: float) -> Optional[str]:
    return _dp_oracle_one(ProbabilityVector(p=p), tol, compare_uniqueness=False)


def _dp_oracle_interval(p: List[float], tol: float) -> Optional[str]:
    return _dp_oracle_one(ProbabilityVector(p=p), tol, compare_uniqueness=True)


def _is_singleton_chain(tree: StrategyTree, n: int) -> bool:
    node = tree
    for unit in range(1, n + 1):
        if not isinstance(node, StrategyNode) or (node.first, node.last) != (unit, unit):
            return False
        node = node.pure
    return True


def _individual(p: List[float], tol: float) -> Optional[str]:
    v = ProbabilityVector(p=p)
    tables, cost = optimal_onp(v)
    if abs(cost - v.n) > AGREEMENT_TOL:
        return f"DP optimum {cost!r} is not n = {v.n}"
    if not _is_singleton_chain(extract_strategy(tables, v), v.n):
        return "optimal strategy is not the chain of singleton tests"
    return None


def _dorfman(p: List[float], tol: float) -> Optional[str]:
    v = ProbabilityVector(p=p)
    dp = hwang_optimal_partition(v, "dorfman")
    _, brute = exhaustive_partition_minimum(v, "dorfman")
    if abs(dp.cost - brute) > ORACLE_TOL:
        return f"partition DP {dp.cost!r} differs from exhaustive minimum {brute!r}"
    return None


def _boundary(p: List[float], tol: float) -> Optional[str]:
    # p holds n copies of the upper endpoint; sampling is not random here
    v = ProbabilityVector(p=p)
    t = expected_tests_gpta(v)
    if abs(t - v.n) > tol:
        return f"GPTA expects {t!r} tests, not n = {v.n}"
    if v.n == 2:
        verdict = is_gpta_optimal(v, tol=tol).verdict
        if verdict != "optimal_not_unique":
            return f"n = 2 verdict is {verdict}, expected a tie"
    return None


def _sample_boundary(rng: np.random.Generator, n: int) -> List[float]:
    return list(homogeneous(n, _interval().upper).p)


CHECKS: Dict[str, Check] = {
    c.name: c
    for c in (
        Check("lemma1", 2, 20, sample_in_interval, _lemma1,
              "Delta_1:n < 1 and the closed form matches the recursion"),
        Check("theorem2", 2, 10, sample_in_interval, _theorem2,
              "GPTA is the unique optimal ordered nested procedure"),
        Check("lemma3", 3, 12, sample_in_interval, _lemma3,
              "isolation trees test at most n-2 units at the root; n-1 and n are siblings"),
        Check("hutucker", 1, 12, sample_weights, _hutucker,
              "Hu-Tucker matches the interval program and exhaustive search"),
        Check("dp-oracle", 1, 5, sample_unrestricted, _dp_oracle,
              "the DP optimum equals the minimum over every strategy"),
        Check("dp-oracle-interval", 1, 5, sample_in_interval, _dp_oracle_interval,
              "in the interval, a unique minimizing strategy exactly when GPTA is unique"),
        Check("individual", 2, 8, sample_high, _individual,
              "with every p >= 0.40 individual testing is optimal"),
        Check("dorfman", 1, 12, sample_wide, _dorfman,
              "the Dorfman partition DP matches exhaustive contiguous partitions"),
        Check("boundary", 2, 50, _sample_boundary, _boundary,
              "at the upper endpoint GPTA costs exactly n and ties at n = 2"),
    )
}


def run_check(
    name: str,
    trials: int = 1000,
    n_min: Optional[int] = None,
    n_max: Optional[int] = None,
    seed: int = 0,
    tol: float = 1e-9,
) -> VerifySummary:
    """Run one named sweep.

    Raises:
        UnknownCheck: no check has this name
    """
    if name not in CHECKS:
        raise UnknownCheck(name, sorted(CHECKS))
    check = CHECKS[name]
    lo = check.n_min if n_min is None else max(n_min, check.n_min)
    hi = check.n_max if n_max is None else min(n_max, check.n_max)
    if n_max is not None and n_max > check.n_max:
        logger.warning(f"{name}: n_max {n_max} clamped to {check.n_max}")
    if hi < lo:
        raise InputFormatError("--n-max", f"{name} needs {lo} <= n <= {check.n_max}, got n_max {hi}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    passed = failed = 0
    counterexample: Optional[Sequence[float]] = None
    detail: Optional[str] = None
    for trial in range(trials):
        n = int(rng.integers(lo, hi + 1)) if hi > lo else lo
        if name == "boundary":
            # deterministic walk over every n
            n = lo + trial % (hi - lo + 1)
        p = check.sample(rng, n)
        problem = check.predicate(p, tol)
        if problem is None:
            passed += 1
            continue
        failed += 1
        if counterexample is None:
            counterexample, detail = p, problem
            logger.warning(f"{name}: counterexample {p}: {problem}")
    logger.info(f"{name}: {passed} passed, {failed} failed ({check.description})")
    return VerifySummary(
        check=name,
        trials=trials,
        passed=passed,
        failed=failed,
        seed=seed,
        counterexample=list(counterexample) if counterexample is not None else None,
        detail=detail,
    )

