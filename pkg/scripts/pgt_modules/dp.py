"""Exact dynamic program over ordered nested procedures.

States are a binomial suffix i..n (value G(i)) or a contaminated segment
i..j followed by the binomial suffix j+1..n (value H(i, j)). Tests are
prefixes of the live set: i..k from a binomial state, i..m with m < j from a
contaminated one. With Q(i, k) = q_i...q_k:

    G(i)    = min_k 1 + Q(i,k) G(k+1) + (1 - Q(i,k)) H(i,k)
    H(i,i)  = G(i+1)
    H(i,j)  = min_m 1 + (1 - Q(i,m))/(1 - Q(i,j)) H(i,m)
                      + Q(i,m)(1 - Q(m+1,j))/(1 - Q(i,j)) H(m+1,j)

Ties go to the smallest k (or m).
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .data_types import (
    IndexOutOfRange,
    LengthMismatch,
    OptimalityVerdict,
    ProbabilityVector,
    TooSmall,
)
from .gpta import expected_tests_gpta
from .model import require_sorted as _require_sorted
from .strategy import DONE, StrategyNode, StrategyTree

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DPTables:
    """Value and argmin tables; every index is 1-based.

    g has n+2 entries with g[n+1] = 0; h, arg_h and q_products are (n+2, n+2).
    g_candidates[i] holds the cost of every first test 1..k from state i,
    for k = i..n.
    """

    n: int
    q_products: np.ndarray
    g: np.ndarray
    h: np.ndarray
    arg_g: np.ndarray
    arg_h: np.ndarray
    unique_g: np.ndarray
    g_candidates: Tuple[np.ndarray, ...]
    tolerance: float

    def G(self, i: int) -> float:
        if not 1 <= i <= self.n + 1:
            raise IndexOutOfRange(i, self.n + 1)
        return float(self.g[i])

    def H(self, i: int, j: int) -> float:
        if not 1 <= i <= j <= self.n:
            raise IndexOutOfRange(j if 1 <= i <= self.n else i, self.n)
        return float(self.h[i, j])

    @property
    def cost(self) -> float:
        return float(self.g[1])


def _q_products(q: Tuple[float, ...]) -> np.ndarray:
    # products taken directly per row so long suffixes never divide by tiny values
    n = len(q)
    table = np.ones((n + 2, n + 2), dtype=np.float64)
    for i in range(1, n + 1):
        running = 1.0
        for k in range(i, n + 1):
            running *= q[k - 1]
            table[i, k] = running
    return table


def _contamination(p: Tuple[float, ...]) -> np.ndarray:
    """1 - Q(i, k) as -expm1(sum log1p(-p_t)); stays positive when q_t rounds to 1."""
    n = len(p)
    table = np.zeros((n + 2, n + 2), dtype=np.float64)
    logs = np.log1p(-np.asarray(p, dtype=np.float64))
    for i in range(1, n + 1):
        table[i, i : n + 1] = -np.expm1(np.cumsum(logs[i - 1 :]))
    return table


def optimal_onp(
    v: ProbabilityVector, require_sorted: bool = True, tol: float = DEFAULT_TOLERANCE
) -> Tuple[DPTables, float]:
    """Build the tables in O(n^3) and return them with the optimal cost G(1).

    Raises:
        NotSorted: require_sorted is set and v is not non-decreasing
    """
    if require_sorted:
        _require_sorted(v)
    n = v.n
    Q = _q_products(v.q)
    C = _contamination(v.p)
    g = np.zeros(n + 2, dtype=np.float64)
    h = np.zeros((n + 2, n + 2), dtype=np.float64)
    arg_g = np.zeros(n + 2, dtype=np.int64)
    arg_h = np.zeros((n + 2, n + 2), dtype=np.int64)
    unique_g = np.ones(n + 2, dtype=bool)
    candidates: List[np.ndarray] = [np.empty(0)] * (n + 2)

    for i in range(n, 0, -1):
        h[i, i] = g[i + 1]
        for j in range(i + 1, n + 1):
            m = np.arange(i, j)
            contaminated = C[i, i:j] * h[i, i:j]
            pure = Q[i, i:j] * C[m + 1, j] * h[m + 1, j]
            costs = 1.0 + (contaminated + pure) / C[i, j]
            best = int(np.argmin(costs))
            h[i, j] = costs[best]
            arg_h[i, j] = i + best
        ks = slice(i, n + 1)
        costs = 1.0 + Q[i, ks] * g[i + 1 : n + 2] + C[i, ks] * h[i, ks]
        best = int(np.argmin(costs))
        g[i] = costs[best]
        arg_g[i] = i + best
        others = np.delete(costs, best)
        unique_g[i] = bool(np.all(others - costs[best] > tol))
        candidates[i] = _frozen(costs)

    tables = DPTables(
        n=n,
        q_products=_frozen(Q),
        g=_frozen(g),
        h=_frozen(h),
        arg_g=_frozen(arg_g),
        arg_h=_frozen(arg_h),
        unique_g=_frozen(unique_g),
        g_candidates=tuple(candidates),
        tolerance=tol,
    )
    logger.debug(f"DP for n={n}: G(1) = {tables.cost:.12g}, first test 1..{arg_g[1]}")
    return tables, tables.cost


def extract_strategy(tables: DPTables, v: Optional[ProbabilityVector] = None) -> StrategyTree:
    """Realize the argmin tables as a strategy tree (subtrees of equal states are shared).

    The tables already hold everything needed; v, when given, must be the
    vector they were built for.

    Raises:
        LengthMismatch: v has a different number of units than the tables
    """
    if v is not None and v.n != tables.n:
        raise LengthMismatch(tables.n, v.n)
    n = tables.n
    binomial: List[StrategyTree] = [DONE] * (n + 2)
    contaminated: Dict[Tuple[int, int], StrategyTree] = {}
    for i in range(n, 0, -1):
        # a contaminated singleton is defective; play continues on the suffix
        contaminated[i, i] = binomial[i + 1]
        for j in range(i + 1, n + 1):
            m = int(tables.arg_h[i, j])
            contaminated[i, j] = StrategyNode(
                i, m, pure=contaminated[m + 1, j], contaminated=contaminated[i, m]
            )
        k = int(tables.arg_g[i])
        binomial[i] = StrategyNode(i, k, pure=binomial[k + 1], contaminated=contaminated[i, k])
    return binomial[1]


def is_gpta_optimal(v: ProbabilityVector, tol: float = DEFAULT_TOLERANCE) -> OptimalityVerdict:
    """Compare GPTA with the DP optimum and check that the pair move is the strict best.

    Every binomial state i..n is reachable under GPTA (a defective first unit
    of a contaminated pair hands play to i+1), so uniqueness is checked at
    every state with at least two units left. Contaminated pairs have a single
    legal move and need no check.
    """
    _require_sorted(v)
    tables, dp_cost = optimal_onp(v, tol=tol)
    gpta_cost = expected_tests_gpta(v)
    gap = gpta_cost - dp_cost
    first_move = int(tables.arg_g[1])
    if abs(gap) > tol:
        verdict = "suboptimal"
    else:
        unique = True
        for i in range(1, v.n):
            costs = tables.g_candidates[i]
            pair = costs[1]
            others = np.delete(costs, 1)
            if not np.all(others - pair > tol):
                unique = False
                break
        verdict = "optimal_and_unique" if unique else "optimal_not_unique"
    logger.debug(f"GPTA {gpta_cost:.12g} vs DP {dp_cost:.12g}: {verdict}")
    return OptimalityVerdict(
        verdict=verdict,
        dp_cost=dp_cost,
        gpta_cost=gpta_cost,
        gap=gap,
        tolerance=tol,
        first_move=first_move,
    )


def first_action_costs(v: ProbabilityVector) -> List[Tuple[int, float]]:
    """Cost of forcing the first test onto units 1..k and playing optimally after."""
    _require_sorted(v)
    if v.n < 2:
        raise TooSmall(v.n, 2)
    tables, _ = optimal_onp(v)
    return [(k, float(c)) for k, c in enumerate(tables.g_candidates[1], start=1)]


def individual_testing_threshold(v: ProbabilityVector) -> float:
    """3 - q_1 - q_1 q_2: the pair-first cost on two units, against 2 for testing each."""
    if v.n < 2:
        raise TooSmall(v.n, 2)
    q = v.q
    return 3.0 - q[0] - q[0] * q[1]


def individual_testing_optimal(v: ProbabilityVector) -> bool:
    return individual_testing_threshold(v) > 2.0


def step1_competitor_bound(v: ProbabilityVector, k: int) -> float:
    """q_1...q_{k-2}(1 - 2 q_{k-1} q_k), the margin of the hand-built competitor at k >= 3."""
    if not 3 <= k <= v.n:
        raise IndexOutOfRange(k, v.n)
    q = v.q
    prefix = float(np.prod(q[: k - 2]))
    return prefix * (1.0 - 2.0 * q[k - 2] * q[k - 1])
