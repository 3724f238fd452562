"""Strategy trees for ordered nested procedures.

A strategy tree tests contiguous unit ranges. The live state is either a
binomial suffix i..n, or a contaminated segment i..j followed by the binomial
suffix j+1..n. Binomial states test a prefix i..k; contaminated states test a
proper prefix i..m (m < j). When a sub-test of a contaminated segment comes
back contaminated, the untested part of the segment rejoins the binomial
suffix. A contaminated singleton is classified defective without a test.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .data_types import InvalidTree, PolicyTrace


@dataclass(frozen=True)
class StrategyLeaf:
    """All units classified."""


@dataclass(frozen=True)
class StrategyNode:
    """Group test of units first..last (1-based, inclusive)."""

    first: int
    last: int
    pure: "StrategyTree"
    contaminated: "StrategyTree"


StrategyTree = Union[StrategyNode, StrategyLeaf]

DONE = StrategyLeaf()


def _normalize(kind: str, i: int, j: int, classification: Optional[List[Optional[bool]]]):
    """Resolve contaminated singletons, which need no test."""
    if kind == "c" and i == j:
        if classification is not None:
            classification[i - 1] = True
        return "b", i + 1, 0
    return kind, i, j


def _check_test(node: StrategyNode, kind: str, i: int, j: int, n: int) -> None:
    if kind == "b":
        if i > n:
            raise InvalidTree(f"test of {node.first}..{node.last} after every unit is classified")
        if node.first != i or not i <= node.last <= n:
            raise InvalidTree(
                f"test of {node.first}..{node.last} is not a prefix of the binomial units {i}..{n}"
            )
    else:
        if node.first != i or not i <= node.last < j:
            raise InvalidTree(
                f"test of {node.first}..{node.last} is not a proper prefix of the "
                f"contaminated units {i}..{j}"
            )


def replay_strategy(tree: StrategyTree, bits: Sequence[bool]) -> PolicyTrace:
    """Run a strategy tree against a ground-truth pattern.

    A group test reads contaminated iff any unit in its range is defective.

    Raises:
        InvalidTree: a test leaves the live state, repeats an inferable
            outcome, or the tree stops before every unit is classified
    """
    n = len(bits)
    classification: List[Optional[bool]] = [None] * n
    tests: List[Tuple[Tuple[int, ...], bool]] = []
    kind, i, j = "b", 1, 0
    node = tree
    while True:
        kind, i, j = _normalize(kind, i, j, classification)
        if isinstance(node, StrategyLeaf):
            if kind == "b" and i == n + 1:
                break
            raise InvalidTree(f"procedure stops with unit {i} unclassified")
        _check_test(node, kind, i, j, n)
        contaminated = any(bits[node.first - 1 : node.last])
        tests.append((tuple(range(node.first - 1, node.last)), contaminated))
        if contaminated:
            kind, j = "c", node.last
            node = node.contaminated
        else:
            for unit in range(node.first, node.last + 1):
                classification[unit - 1] = False
            i = node.last + 1
            node = node.pure
    return PolicyTrace(tests=tests, classification=[bool(c) for c in classification])


def validate_strategy(tree: StrategyTree, n: int) -> None:
    """Check every path of the tree against the ordered nested rules for n units."""
    stack: List[Tuple[StrategyTree, str, int, int]] = [(tree, "b", 1, 0)]
    while stack:
        node, kind, i, j = stack.pop()
        kind, i, j = _normalize(kind, i, j, None)
        if isinstance(node, StrategyLeaf):
            if kind == "b" and i == n + 1:
                continue
            raise InvalidTree(f"procedure stops with unit {i} unclassified")
        _check_test(node, kind, i, j, n)
        if kind == "b":
            stack.append((node.pure, "b", node.last + 1, 0))
        else:
            stack.append((node.pure, "c", node.last + 1, j))
        stack.append((node.contaminated, "c", i, node.last))


def count_tests(tree: StrategyTree) -> int:
    """Number of internal nodes (tests) in the tree."""
    if isinstance(tree, StrategyLeaf):
        return 0
    return 1 + count_tests(tree.pure) + count_tests(tree.contaminated)


def first_test(tree: StrategyTree) -> Optional[Tuple[int, int]]:
    if isinstance(tree, StrategyLeaf):
        return None
    return tree.first, tree.last


def strategy_to_json(tree: StrategyTree) -> Dict[str, Any]:
    """Serialize to {"test":{"from":i,"to":k},"pure":...,"contam":...} / {"done":true}."""
    if isinstance(tree, StrategyLeaf):
        return {"done": True}
    return {
        "test": {"from": tree.first, "to": tree.last},
        "pure": strategy_to_json(tree.pure),
        "contam": strategy_to_json(tree.contaminated),
    }


def strategy_from_json(data: Dict[str, Any]) -> StrategyTree:
    """Inverse of strategy_to_json."""
    if not isinstance(data, dict):
        raise InvalidTree(f"expected an object, got {type(data).__name__}")
    if data.get("done") is True:
        return DONE
    try:
        test = data["test"]
        return StrategyNode(
            first=int(test["from"]),
            last=int(test["to"]),
            pure=strategy_from_json(data["pure"]),
            contaminated=strategy_from_json(data["contam"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTree(f"malformed node: {e}") from e


def strategy_units(tree: StrategyTree) -> int:
    """Number of units the tree classifies, read off its rightmost path."""
    n = 0
    node = tree
    while isinstance(node, StrategyNode):
        n = max(n, node.last)
        node = node.pure
    return n
