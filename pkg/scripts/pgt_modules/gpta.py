"""Generalized pairwise testing: the policy engine and its expected test counts.

The binomial set is always {carry} + units cursor..n in the original order,
where carry is a unit handed back by a contaminated pair whose tested unit
turned out defective. Each round:

    Step 0  empty set: stop; a lone unit: test it.
    Step 1  test the first two units of the binomial set as a pair.
    Step 2  on a contaminated pair, test the unit with the smaller defect
            probability (the first one on ties). Defective: the other unit
            returns to the binomial set. Pure: the other unit is defective.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

from .data_types import (
    DefectPattern,
    DeltaVector,
    IndexOutOfRange,
    LengthMismatch,
    MisclassifiedPattern,
    NotSorted,
    PolicyTrace,
    ProbabilityVector,
    TestingPolicy,
    TestLog,
    TestRecord,
    TooLarge,
    TooSmall,
)
from .model import all_patterns, first_descent, pattern_probabilities, require_sorted
from .strategy import DONE, StrategyNode, StrategyTree

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 20

Classification = Literal["pure", "defective"]


@dataclass
class GptaState:
    """Live state of one GPTA run; unit indices are 0-based."""

    n: int
    cursor: int = 0
    carry: Optional[int] = None
    classified: Dict[int, bool] = field(default_factory=dict)

    def binomial(self) -> List[int]:
        """Unclassified units in the original order."""
        front = [self.carry] if self.carry is not None else []
        return front + list(range(self.cursor, self.n))

    def classify(self, unit: int, defective: bool) -> None:
        if unit in self.classified:
            raise RuntimeError(f"unit {unit + 1} classified twice")
        self.classified[unit] = defective

    def take(self, count: int) -> List[int]:
        """Remove the first count units of the binomial set."""
        units = []
        if self.carry is not None:
            units.append(self.carry)
            self.carry = None
        while len(units) < count:
            units.append(self.cursor)
            self.cursor += 1
        return units


def _gpta_trace(p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
    state = GptaState(n=len(p))
    tests: List[Tuple[Tuple[int, ...], bool]] = []
    while True:
        remaining = len(state.binomial())
        if remaining == 0:
            break
        if remaining == 1:
            (unit,) = state.take(1)
            tests.append(((unit,), bits[unit]))
            state.classify(unit, bits[unit])
            continue
        first, second = state.take(2)
        contaminated = bits[first] or bits[second]
        tests.append(((first, second), contaminated))
        if not contaminated:
            state.classify(first, False)
            state.classify(second, False)
            continue
        tested, other = (first, second) if p[first] <= p[second] else (second, first)
        tests.append(((tested,), bits[tested]))
        if bits[tested]:
            state.classify(tested, True)
            state.carry = other
        else:
            state.classify(tested, False)
            state.classify(other, True)
    classification = [state.classified[u] for u in range(state.n)]
    return PolicyTrace(tests=tests, classification=classification)


def run_gpta(v: ProbabilityVector, d: DefectPattern) -> Tuple[TestLog, Dict[int, Classification]]:
    """Run GPTA on sorted v against the ground truth d.

    Returns the test log and a map from 1-based unit index to its class.

    Raises:
        NotSorted: v is not non-decreasing
        LengthMismatch: d and v disagree on n
    """
    require_sorted(v)
    if d.n != v.n:
        raise LengthMismatch(v.n, d.n)
    trace = _gpta_trace(v.p, d.bits)
    records = [
        TestRecord(
            first=min(units) + 1,
            last=max(units) + 1,
            outcome="contaminated" if outcome else "pure",
        )
        for units, outcome in trace.tests
    ]
    classification: Dict[int, Classification] = {
        unit + 1: "defective" if defective else "pure"
        for unit, defective in enumerate(trace.classification)
    }
    return TestLog(tests=records), classification


def delta_recursive(v: ProbabilityVector) -> DeltaVector:
    """Delta_{i:n} by the backward recursion Delta_i = 2 - q_i q_{i+1} - q_i Delta_{i+1}."""
    q = v.q
    n = v.n
    values = [0.0] * n
    values[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        values[i] = 2.0 - q[i] * q[i + 1] - q[i] * values[i + 1]
    return DeltaVector(values=values)


def delta_closed_form(i: int, v: ProbabilityVector) -> float:
    """Delta_{i:n} as an alternating sum (1-based i); a cross-check for delta_recursive."""
    n = v.n
    if not 1 <= i <= n:
        raise IndexOutOfRange(i, n)
    q = v.q
    start = i - 1
    terms = []
    prefix = 1.0  # q_i ... q_{k-1}
    sign = 1.0
    for k in range(start, n - 1):
        terms.append(sign * prefix * (2.0 - q[k] * q[k + 1]))
        prefix *= q[k]
        sign = -sign
    terms.append(sign * prefix)
    return math.fsum(terms)


def expected_tests_gpta(v: ProbabilityVector) -> float:
    """t_{1:n}, the expected number of GPTA tests on sorted v."""
    return math.fsum(delta_recursive(v).values)


def suffix_expectations(v: ProbabilityVector) -> Tuple[float, ...]:
    """t_{i:n} for i = 1..n+1, with t_{n+1:n} = 0."""
    deltas = delta_recursive(v).values
    t = [0.0] * (v.n + 1)
    for i in range(v.n - 1, -1, -1):
        t[i] = t[i + 1] + deltas[i]
    return tuple(t)


def leading_deltas(v: ProbabilityVector) -> Tuple[float, ...]:
    """Delta_{1:m} of the prefix p_1..p_m for m = 1..n."""
    q = v.q
    result = []
    for m in range(1, v.n + 1):
        delta = 1.0
        for i in range(m - 2, -1, -1):
            delta = 2.0 - q[i] * q[i + 1] - q[i] * delta
        result.append(delta)
    return tuple(result)


def check_delta_lt_one(v: ProbabilityVector) -> bool:
    """True iff Delta_{1:n} < 1."""
    if v.n < 2:
        raise TooSmall(v.n, 2)
    return delta_recursive(v).values[0] < 1.0


def boundary_polynomial(x: float) -> float:
    """f(x) = 2 - 2x + x^3; equals 1 at the golden-ratio conjugate."""
    return 2.0 - 2.0 * x + x**3


def gpta_expected_any_order(p: Sequence[float]) -> float:
    """Exact expected GPTA test count on p in the given (possibly unsorted) order.

    Tables run over the cursor with and without a carried unit; the carry can
    be any unit before the cursor when the order is not sorted.
    """
    n = len(p)
    q = [1.0 - x for x in p]
    free = [0.0] * (n + 2)
    carried: List[List[float]] = [[] for _ in range(n + 2)]

    def pair(a: int, b: int, nxt: int) -> float:
        tested, other = (a, b) if p[a] <= p[b] else (b, a)
        both_pure = q[a] * q[b]
        return (
            1.0
            + both_pure * free[nxt]
            + (1.0 - both_pure)
            + p[tested] * carried[nxt][other]
            + q[tested] * p[other] * free[nxt]
        )

    for k in range(n, -1, -1):
        if k == n:
            carried[k] = [1.0] * k
            free[k] = 0.0
            continue
        carried[k] = [pair(c, k, k + 1) for c in range(k)]
        free[k] = 1.0 if k == n - 1 else pair(k, k + 1, k + 2)
    return free[0]


def gpta_strategy(v: ProbabilityVector) -> StrategyTree:
    """The strategy tree GPTA induces on sorted v.

    Subtrees for equal suffixes are shared, so the result is a DAG of size O(n).
    """
    require_sorted(v)
    n = v.n
    suffix: List[StrategyTree] = [DONE] * (n + 2)
    for k in range(n, 0, -1):
        if k == n:
            suffix[k] = StrategyNode(k, k, pure=DONE, contaminated=DONE)
            continue
        split = StrategyNode(k, k, pure=suffix[k + 2], contaminated=suffix[k + 1])
        suffix[k] = StrategyNode(k, k + 1, pure=suffix[k + 2], contaminated=split)
    return suffix[1]


def exact_expected_by_enumeration(
    v: ProbabilityVector, policy: TestingPolicy, max_n: int = ENUMERATION_CAP
) -> float:
    """Expected test count of a deterministic policy over all 2^n patterns.

    Raises:
        TooLarge: n exceeds max_n
        MisclassifiedPattern: the policy got some pattern wrong
    """
    if v.n > max_n:
        raise TooLarge(v.n, max_n)
    probs = pattern_probabilities(v)
    terms = []
    for prob, bits in zip(probs, all_patterns(v.n)):
        trace = policy.run(v.p, bits)
        if list(trace.classification) != list(bits):
            raise MisclassifiedPattern(bits, trace.classification)
        terms.append(float(prob) * len(trace.tests))
    expected = math.fsum(terms)
    logger.debug(f"Enumerated {len(terms)} patterns for {policy.name}: {expected:.12g}")
    return expected


class GptaPolicy:
    """GPTA behind the common policy protocol."""

    name = "gpta"

    def __init__(self, allow_unsorted: bool = False):
        self.allow_unsorted = allow_unsorted

    def run(self, p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
        if len(bits) != len(p):
            raise LengthMismatch(len(p), len(bits))
        if not self.allow_unsorted:
            index = first_descent(p)
            if index:
                raise NotSorted(index)
        return _gpta_trace(p, bits)

    def exact(self, v: ProbabilityVector) -> Optional[float]:
        if first_descent(v.p) == 0:
            return expected_tests_gpta(v)
        if self.allow_unsorted:
            return gpta_expected_any_order(v.p)
        raise NotSorted(first_descent(v.p))
