"""Monte Carlo harness and the baseline policies GPTA is compared against.

Replicate r of a run with master seed s draws its pattern from a Philox
stream keyed by s with r in the counter, so every replicate's test count is
fixed before any scheduling happens. Counts land in slot r and are reduced
in index order, which keeps reports identical across worker counts.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .data_types import (
    DefectPattern,
    InputFormatError,
    LengthMismatch,
    McReport,
    MisclassifiedPattern,
    NotSorted,
    Partition,
    PartitionResult,
    PolicyTrace,
    ProbabilityVector,
    SweepRow,
    TestingPolicy,
    TooLarge,
    UnknownPolicy,
)
from .dp import optimal_onp
from .gpta import GptaPolicy, expected_tests_gpta
from .model import first_descent, homogeneous
from .oracle import exact_strategy_cost
from .strategy import StrategyTree, replay_strategy, strategy_units

logger = logging.getLogger(__name__)

PARTITION_CAP = 12
TREE_EXACT_CAP = 20
SWEEP_CAP = 200
CONJECTURE_SCALE_CAP = 1000

POLICY_NAMES = ("gpta", "individual", "dorfman", "mdorfman", "tree")


def replicate_stream(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate index under the master seed."""
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 64))


def sample_pattern(v: ProbabilityVector, stream: np.random.Generator) -> DefectPattern:
    """Each unit defective independently with probability p_i."""
    draws = stream.random(v.n)
    return DefectPattern(bits=tuple(bool(x) for x in draws < np.asarray(v.p)))


def dorfman_group_cost(q_group: Sequence[float]) -> float:
    """Pool test plus a retest of every member when the pool is contaminated."""
    k = len(q_group)
    if k == 1:
        return 1.0
    return 1.0 + k * (1.0 - math.prod(q_group))


def modified_dorfman_group_cost(q_group: Sequence[float]) -> float:
    """Like Dorfman, but the last member is inferred when the others test pure."""
    k = len(q_group)
    if k == 1:
        return 1.0
    return 1.0 + (k - 1) * (1.0 - math.prod(q_group)) + (1.0 - math.prod(q_group[:-1]))


_GROUP_COSTS = {
    "dorfman": dorfman_group_cost,
    "modified_dorfman": modified_dorfman_group_cost,
}


def _group_cost_fn(policy: str):
    try:
        return _GROUP_COSTS[policy]
    except KeyError:
        raise UnknownPolicy(policy) from None


def partition_cost(v: ProbabilityVector, partition: Partition, policy: str = "dorfman") -> float:
    """Expected tests of a pooling policy applied group by group."""
    if partition.n != v.n:
        raise LengthMismatch(v.n, partition.n)
    cost_fn = _group_cost_fn(policy)
    q = v.q
    return math.fsum(cost_fn(q[a - 1 : b]) for a, b in partition.groups)


def hwang_optimal_partition(v: ProbabilityVector, policy: str = "dorfman") -> PartitionResult:
    """Best contiguous partition by best(i) = min_j cost(i..j) + best(j+1).

    Contiguous partitions are provably optimal for Dorfman on sorted input;
    for modified Dorfman the result is labeled heuristic.

    Raises:
        NotSorted: policy is dorfman and v is not non-decreasing
    """
    cost_fn = _group_cost_fn(policy)
    if policy == "dorfman":
        index = first_descent(v.p)
        if index:
            raise NotSorted(index)
    n = v.n
    q = v.q
    best = [0.0] * (n + 2)
    cut = [0] * (n + 2)
    for i in range(n, 0, -1):
        best[i] = math.inf
        for j in range(i, n + 1):
            cost = cost_fn(q[i - 1 : j]) + best[j + 1]
            if cost < best[i]:
                best[i] = cost
                cut[i] = j
    groups = []
    i = 1
    while i <= n:
        groups.append((i, cut[i]))
        i = cut[i] + 1
    return PartitionResult(
        policy=policy,
        partition=Partition(n=n, groups=tuple(groups)),
        cost=best[1],
        heuristic=policy == "modified_dorfman",
    )


def exhaustive_partition_minimum(v: ProbabilityVector, policy: str = "dorfman") -> Tuple[Partition, float]:
    """Minimum over all 2^(n-1) contiguous partitions; a brute-force oracle."""
    n = v.n
    if n > PARTITION_CAP:
        raise TooLarge(n, PARTITION_CAP)
    best_partition = None
    best_cost = math.inf
    for mask in range(2 ** (n - 1)):
        groups = []
        start = 1
        for position in range(1, n):
            # bit position-1 set: cut after unit position
            if mask >> (position - 1) & 1:
                groups.append((start, position))
                start = position + 1
        groups.append((start, n))
        partition = Partition(n=n, groups=tuple(groups))
        cost = partition_cost(v, partition, policy)
        if cost < best_cost:
            best_partition, best_cost = partition, cost
    return best_partition, best_cost


class IndividualPolicy:
    """Test every unit on its own."""

    name = "individual"
    n: Optional[int] = None

    def run(self, p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
        return PolicyTrace(
            tests=[((u,), bool(bits[u])) for u in range(len(bits))],
            classification=[bool(b) for b in bits],
        )

    def exact(self, v: ProbabilityVector) -> Optional[float]:
        return float(v.n)


class DorfmanPolicy:
    """Pool each group; retest every member of a contaminated pool."""

    name = "dorfman"
    cost_policy = "dorfman"

    def __init__(self, partition: Partition):
        self.partition = partition
        self.n = partition.n

    def _run_group(self, units: List[int], bits: Sequence[bool], tests, classification) -> None:
        for u in units:
            tests.append(((u,), bool(bits[u])))
            classification[u] = bool(bits[u])

    def run(self, p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
        tests: List[Tuple[Tuple[int, ...], bool]] = []
        classification = [False] * len(bits)
        for a, b in self.partition.groups:
            units = list(range(a - 1, b))
            if len(units) == 1:
                self._run_group(units, bits, tests, classification)
                continue
            contaminated = any(bits[u] for u in units)
            tests.append((tuple(units), contaminated))
            if contaminated:
                self._run_group(units, bits, tests, classification)
        return PolicyTrace(tests=tests, classification=classification)

    def exact(self, v: ProbabilityVector) -> Optional[float]:
        return partition_cost(v, self.partition, self.cost_policy)


class ModifiedDorfmanPolicy(DorfmanPolicy):
    """Dorfman that skips the last member when the rest of a contaminated pool tests pure."""

    name = "modified_dorfman"
    cost_policy = "modified_dorfman"

    def _run_group(self, units, bits, tests, classification) -> None:
        if len(units) == 1:
            super()._run_group(units, bits, tests, classification)
            return
        *head, last = units
        super()._run_group(head, bits, tests, classification)
        if any(bits[u] for u in head):
            tests.append(((last,), bool(bits[last])))
            classification[last] = bool(bits[last])
        else:
            classification[last] = True


class TreePolicy:
    """Follow an explicit strategy tree."""

    name = "tree"

    def __init__(self, tree: StrategyTree, n: Optional[int] = None):
        self.tree = tree
        self.n = n if n is not None else strategy_units(tree)

    def run(self, p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
        return replay_strategy(self.tree, bits)

    def exact(self, v: ProbabilityVector) -> Optional[float]:
        if v.n > TREE_EXACT_CAP:
            return None
        return exact_strategy_cost(self.tree, v)


def resolve_policy(
    name: str, v: ProbabilityVector, tree: Optional[StrategyTree] = None
) -> TestingPolicy:
    """Build the named policy for v; pooling policies use the Hwang partition of v."""
    if name == "gpta":
        return GptaPolicy()
    if name == "individual":
        return IndividualPolicy()
    if name == "dorfman":
        return DorfmanPolicy(hwang_optimal_partition(v, "dorfman").partition)
    if name in ("mdorfman", "modified_dorfman"):
        return ModifiedDorfmanPolicy(hwang_optimal_partition(v, "modified_dorfman").partition)
    if name == "tree":
        if tree is None:
            raise InputFormatError("--tree", "policy tree needs a strategy tree file")
        return TreePolicy(tree)
    raise UnknownPolicy(name)


def _simulate_chunk(args) -> np.ndarray:
    policy, v, seed, start, stop = args
    counts = np.empty(stop - start, dtype=np.int64)
    for slot, index in enumerate(range(start, stop)):
        pattern = sample_pattern(v, replicate_stream(seed, index))
        trace = policy.run(v.p, pattern.bits)
        if list(trace.classification) != list(pattern.bits):
            raise MisclassifiedPattern(pattern.bits, trace.classification)
        counts[slot] = len(trace.tests)
    return counts


def simulate(
    policy: TestingPolicy, v: ProbabilityVector, reps: int, seed: int, workers: int = 1
) -> McReport:
    """Mean test count of the policy over reps sampled patterns.

    Raises:
        LengthMismatch: the policy was built for a different n
    """
    expected_n = getattr(policy, "n", None)
    if expected_n is not None and expected_n != v.n:
        raise LengthMismatch(v.n, expected_n)
    # raises for inputs the policy rejects before any worker starts
    exact = policy.exact(v)
    workers = max(1, min(workers, reps))
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    jobs = [(policy, v, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            chunks = list(pool.map(_simulate_chunk, jobs))
    else:
        chunks = [_simulate_chunk(job) for job in jobs]
    counts = np.concatenate(chunks)

    mean = float(counts.mean())
    stddev = float(counts.std(ddof=1)) if reps > 1 else 0.0
    stderr = stddev / math.sqrt(reps)
    z_score = None
    if exact is not None:
        if stderr > 0:
            z_score = abs(mean - exact) / stderr
        elif mean == exact:
            z_score = 0.0
    logger.info(f"{policy.name}: mean {mean:.6f} over {reps} replicates (SE {stderr:.2e})")
    return McReport(
        policy=policy.name,
        n=v.n,
        replications=reps,
        seed=seed,
        mean=mean,
        stddev=stddev,
        stderr=stderr,
        exact=exact,
        z_score=z_score,
    )


def parse_p_grid(text: str) -> List[float]:
    """Expand "lo:hi:step" into an inclusive grid."""
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise InputFormatError("--p-grid", f"expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise InputFormatError("--p-grid", f"empty grid {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-6)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def sweep_row(args: Tuple[int, float]) -> SweepRow:
    n, p = args
    v = homogeneous(n, p)
    _, dp_cost = optimal_onp(v)
    return SweepRow(
        p=p,
        gpta_t=expected_tests_gpta(v),
        dp_t=dp_cost,
        individual=float(n),
        dorfman=hwang_optimal_partition(v, "dorfman").cost,
        mdorfman=hwang_optimal_partition(v, "modified_dorfman").cost,
    )


def sweep_homogeneous(
    n: int, grid: Sequence[float], workers: int = 1, conjecture_scale: bool = False
) -> List[SweepRow]:
    """One row of exact costs per grid point for n homogeneous units."""
    cap = CONJECTURE_SCALE_CAP if conjecture_scale else SWEEP_CAP
    if n > cap:
        raise TooLarge(n, cap)
    jobs = [(n, p) for p in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(sweep_row, jobs))
    else:
        rows = [sweep_row(job) for job in jobs]
    logger.info(f"Swept {len(rows)} grid points at n={n}")
    return rows
