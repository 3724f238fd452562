"""Alphabetic trees for isolating the first defective unit of a contaminated segment.

An isolation tree has leaves 1..n in order; leaf i means "unit i is the first
defective". Each internal node tests the leaf range of its left subtree: a
contaminated outcome goes left, a pure one goes right. With the weights
w_i = p_i q_1...q_{i-1} / alpha, alpha = 1 - q_1...q_n, the expected number of
tests is the weighted leaf depth, so the best isolation procedure is an
optimal alphabetic tree.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Sequence, Tuple, Union

from .data_types import (
    InputFormatError,
    InvalidTree,
    LeafCountMismatch,
    ProbabilityVector,
    TooLarge,
    TooSmall,
    WeightVector,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 8


@dataclass(frozen=True)
class AlphabeticLeaf:
    label: int

    @property
    def lo(self) -> int:
        return self.label

    @property
    def hi(self) -> int:
        return self.label


@dataclass(frozen=True)
class AlphabeticNode:
    """Internal node; first..last is the tested group (the left subtree's leaves)."""

    left: "AlphabeticTree"
    right: "AlphabeticTree"
    first: int
    last: int

    @property
    def lo(self) -> int:
        return self.left.lo

    @property
    def hi(self) -> int:
        return self.right.hi


AlphabeticTree = Union[AlphabeticLeaf, AlphabeticNode]


def join(left: AlphabeticTree, right: AlphabeticTree) -> AlphabeticNode:
    if left.hi + 1 != right.lo:
        raise InvalidTree(f"subtrees {left.lo}..{left.hi} and {right.lo}..{right.hi} are not adjacent")
    return AlphabeticNode(left=left, right=right, first=left.lo, last=left.hi)


def lemma2_alpha(v: ProbabilityVector) -> float:
    """Probability that at least one unit is defective.

    Computed as -expm1(sum log1p(-p_i)) so it stays positive when every q_i
    rounds to 1.
    """
    return -math.expm1(math.fsum(math.log1p(-p) for p in v.p))


def lemma2_weights(v: ProbabilityVector) -> WeightVector:
    """Probability that unit i is the first defective, given at least one is."""
    alpha = lemma2_alpha(v)
    q = v.q
    weights = []
    none_before = 1.0
    for i in range(v.n):
        weights.append(v.p[i] * none_before / alpha)
        none_before *= q[i]
    return WeightVector(w=weights)


def hu_tucker_levels(w: WeightVector) -> Tuple[int, ...]:
    """Combination and level-assignment phases: the depth of every leaf.

    Leaves start as squares; a merged pair becomes a circle at the left
    position. Two nodes are compatible when no square lies strictly between
    them. The compatible pair with the least sum is merged each round, ties
    going to the smallest left index and then the smallest right index.
    """
    n = w.n
    levels = [0] * n
    # (weight, is_square, leaves)
    work: List[Tuple[float, bool, List[int]]] = [(x, True, [i]) for i, x in enumerate(w.w)]
    while len(work) > 1:
        best = None
        for a in range(len(work) - 1):
            for b in range(a + 1, len(work)):
                total = work[a][0] + work[b][0]
                if best is None or total < best[0]:
                    best = (total, a, b)
                if work[b][1]:
                    # nothing right of a square is compatible with a
                    break
        total, a, b = best
        leaves = work[a][2] + work[b][2]
        for leaf in leaves:
            levels[leaf] += 1
        work[a] = (total, False, leaves)
        del work[b]
    return tuple(levels)


def tree_from_levels(levels: Sequence[int]) -> AlphabeticTree:
    """Reconstruction phase: the unique alphabetic tree with the given leaf depths."""
    if not levels:
        raise InvalidTree("no leaves")
    stack: List[Tuple[int, AlphabeticTree]] = []
    for label, level in enumerate(levels, start=1):
        stack.append((level, AlphabeticLeaf(label)))
        while len(stack) >= 2 and stack[-1][0] == stack[-2][0]:
            level_right, right = stack.pop()
            _, left = stack.pop()
            stack.append((level_right - 1, join(left, right)))
    if len(stack) != 1 or stack[0][0] != 0:
        raise InvalidTree(f"levels {tuple(levels)} do not describe an alphabetic tree")
    return stack[0][1]


def hu_tucker(w: WeightVector) -> AlphabeticTree:
    """Optimal alphabetic tree for the weights w."""
    levels = hu_tucker_levels(w)
    logger.debug(f"Hu-Tucker levels: {levels}")
    return tree_from_levels(levels)


def gilbert_moore_cost(w: WeightVector) -> float:
    """Optimal alphabetic tree cost by the O(n^3) interval program."""
    n = w.n
    prefix = [0.0]
    for x in w.w:
        prefix.append(prefix[-1] + x)
    cost = [[0.0] * n for _ in range(n)]
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            best = min(cost[i][k] + cost[k + 1][j] for k in range(i, j))
            cost[i][j] = prefix[j + 1] - prefix[i] + best
    return cost[0][n - 1]


def leaf_depths(t: AlphabeticTree) -> Tuple[int, ...]:
    """Depth of every leaf, in label order."""
    depths: List[int] = []
    stack: List[Tuple[AlphabeticTree, int]] = [(t, 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, AlphabeticLeaf):
            depths.append(depth)
        else:
            stack.append((node.right, depth + 1))
            stack.append((node.left, depth + 1))
    return tuple(depths)


def leaf_labels(t: AlphabeticTree) -> Tuple[int, ...]:
    """In-order leaf labels."""
    if isinstance(t, AlphabeticLeaf):
        return (t.label,)
    return leaf_labels(t.left) + leaf_labels(t.right)


def tree_cost(t: AlphabeticTree, w: WeightVector) -> float:
    """Weighted leaf depth sum of t under w."""
    depths = leaf_depths(t)
    if len(depths) != w.n:
        raise LeafCountMismatch(w.n, len(depths))
    return math.fsum(x * depth for x, depth in zip(w.w, depths))


def huffman_cost(w: WeightVector) -> float:
    """Optimal prefix-code cost when leaf order is free."""
    heap = list(w.w)
    heapq.heapify(heap)
    total = 0.0
    while len(heap) > 1:
        merged = heapq.heappop(heap) + heapq.heappop(heap)
        total += merged
        heapq.heappush(heap, merged)
    return total


def isolation_tree(v: ProbabilityVector) -> Tuple[AlphabeticTree, float]:
    """Best procedure for finding the first defective of a contaminated segment."""
    w = lemma2_weights(v)
    tree = hu_tucker(w)
    return tree, tree_cost(tree, w)


def isolate_first_defective(t: AlphabeticTree, bits: Sequence[bool]) -> Tuple[int, int]:
    """Replay t on a contaminated pattern; return (first defective label, tests used)."""
    if not any(bits):
        raise InputFormatError("pattern", "isolation needs at least one defective unit")
    tests = 0
    node = t
    while isinstance(node, AlphabeticNode):
        tests += 1
        if any(bits[node.first - 1 : node.last]):
            node = node.left
        else:
            node = node.right
    return node.label, tests


def check_lemma3_structure(t: AlphabeticTree) -> bool:
    """True iff the root tests only units 1..n-2 and leaves n-1 and n are siblings."""
    n = len(leaf_depths(t))
    if n < 3:
        raise TooSmall(n, 3)
    if not isinstance(t, AlphabeticNode) or t.last > n - 2:
        return False
    node: AlphabeticTree = t
    # leaf n sits at the end of the right spine
    while isinstance(node, AlphabeticNode):
        if isinstance(node.right, AlphabeticLeaf):
            return (
                node.right.label == n
                and isinstance(node.left, AlphabeticLeaf)
                and node.left.label == n - 1
            )
        node = node.right
    return False


def lemma3_bound(v: ProbabilityVector) -> float:
    """q_{n-2}(1 + q_{n-1}(1 - q_n)); below 1 exactly when w_n < w_{n-2}."""
    if v.n < 3:
        raise TooSmall(v.n, 3)
    q = v.q
    return q[-3] * (1.0 + q[-2] * (1.0 - q[-1]))


def lemma3_bound_supremum() -> float:
    """Supremum of lemma3_bound over the closed admissible interval."""
    q_high = 1.0 / math.sqrt(2.0)
    q_low = (math.sqrt(5.0) - 1.0) / 2.0
    return q_high * (1.0 + q_high * (1.0 - q_low))


def _trees_between(lo: int, hi: int, memo: Dict[Tuple[int, int], List[AlphabeticTree]]):
    key = (lo, hi)
    if key in memo:
        return memo[key]
    if lo == hi:
        result: List[AlphabeticTree] = [AlphabeticLeaf(lo)]
    else:
        result = []
        for split in range(lo, hi):
            for left, right in itertools.product(
                _trees_between(lo, split, memo), _trees_between(split + 1, hi, memo)
            ):
                result.append(join(left, right))
    memo[key] = result
    return result


def enumerate_alphabetic_trees(n: int) -> Iterator[AlphabeticTree]:
    """Every alphabetic tree on leaves 1..n (Catalan(n-1) shapes)."""
    if n < 1:
        raise TooSmall(n, 1)
    if n > EXHAUSTIVE_CAP:
        raise TooLarge(n, EXHAUSTIVE_CAP)
    return iter(_trees_between(1, n, {}))


def exhaustive_alphabetic_cost(w: WeightVector) -> float:
    """Minimum tree_cost over every alphabetic tree; a brute-force oracle."""
    return min(tree_cost(t, w) for t in enumerate_alphabetic_trees(w.n))


def alphabetic_to_json(t: AlphabeticTree) -> Dict[str, Any]:
    """{"test":{"from":i,"to":k},"contaminated":left,"pure":right} / {"defective":i}."""
    if isinstance(t, AlphabeticLeaf):
        return {"defective": t.label}
    return {
        "test": {"from": t.first, "to": t.last},
        "contaminated": alphabetic_to_json(t.left),
        "pure": alphabetic_to_json(t.right),
    }


def alphabetic_from_json(data: Dict[str, Any]) -> AlphabeticTree:
    """Inverse of alphabetic_to_json; the stored test range must match the left subtree."""
    if not isinstance(data, dict):
        raise InvalidTree(f"expected an object, got {type(data).__name__}")
    if "defective" in data:
        return AlphabeticLeaf(int(data["defective"]))
    try:
        node = join(alphabetic_from_json(data["contaminated"]), alphabetic_from_json(data["pure"]))
        test = data["test"]
        if (int(test["from"]), int(test["to"])) != (node.first, node.last):
            raise InvalidTree(
                f"test {test['from']}..{test['to']} does not match the left subtree "
                f"{node.first}..{node.last}"
            )
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTree(f"malformed node: {e}") from e
    return node
