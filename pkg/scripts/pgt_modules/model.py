"""Core domain operations: probability vectors, the admissible interval, defect patterns.

Also parses the two input formats shared with the CLI: newline-separated
decimals, or a JSON document {"p": [...]}.
"""

import itertools
import json
import logging
from pathlib import Path
from typing import Any, Iterator, Sequence, Tuple

import numpy as np

from .data_types import (
    AdmissibleInterval,
    DefectPattern,
    EmptyInput,
    InputFormatError,
    LengthMismatch,
    NotFinite,
    NotSorted,
    Openness,
    OutOfUnitInterval,
    ProbabilityVector,
)

logger = logging.getLogger(__name__)


def validate_probabilities(raw: Sequence[Any]) -> ProbabilityVector:
    """Validate raw numbers into a ProbabilityVector, preserving order.

    Raises:
        EmptyInput: raw is empty
        NotFinite: a value is NaN or infinite
        OutOfUnitInterval: a value is not strictly between 0 and 1
    """
    return ProbabilityVector(p=raw)


def homogeneous(n: int, p: float) -> ProbabilityVector:
    """n units that all share the defect probability p."""
    if n < 1:
        raise EmptyInput(f"Homogeneous vector needs n >= 1, got {n}")
    return ProbabilityVector(p=[p] * n)


def sort_nondecreasing(v: ProbabilityVector) -> Tuple[ProbabilityVector, Tuple[int, ...]]:
    """Stable sort into p_1 <= ... <= p_n.

    Returns the sorted vector and the permutation mapping each sorted position
    to its 1-based original index.
    """
    order = sorted(range(v.n), key=lambda i: v.p[i])
    permutation = tuple(i + 1 for i in order)
    return ProbabilityVector(p=[v.p[i] for i in order]), permutation


def first_descent(p: Sequence[float]) -> int:
    """1-based index i with p_i > p_{i+1}, or 0 when p is non-decreasing."""
    for i in range(len(p) - 1):
        if p[i] > p[i + 1]:
            return i + 1
    return 0


def is_sorted(v: ProbabilityVector) -> bool:
    return first_descent(v.p) == 0


def require_sorted(v: ProbabilityVector) -> None:
    """Raise NotSorted unless v is non-decreasing."""
    index = first_descent(v.p)
    if index:
        raise NotSorted(index)


def in_admissible_interval(v: ProbabilityVector, openness: Openness = "open") -> bool:
    """True iff every p_i lies in the admissible interval with the given openness."""
    interval = AdmissibleInterval(openness=openness)
    return all(interval.contains(x) for x in v.p)


def pattern_probability(v: ProbabilityVector, d: DefectPattern) -> float:
    """Probability of the defect pattern d under independent units."""
    if d.n != v.n:
        raise LengthMismatch(v.n, d.n)
    result = 1.0
    for p, defective in zip(v.p, d.bits):
        result *= p if defective else 1.0 - p
    return result


def all_patterns(n: int) -> Iterator[Tuple[bool, ...]]:
    """Every defect pattern of n units; unit 1 is the most significant position."""
    return itertools.product((False, True), repeat=n)


def pattern_probabilities(v: ProbabilityVector) -> np.ndarray:
    """Probabilities of all 2^n patterns, in the order of all_patterns(n)."""
    probs = np.ones(1, dtype=np.float64)
    for p in v.p:
        probs = np.outer(probs, np.array([1.0 - p, p])).ravel()
    return probs


def pattern_matrix(n: int) -> np.ndarray:
    """Boolean (2^n, n) matrix whose rows are all_patterns(n)."""
    codes = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(bool)


def parse_probability_text(text: str) -> ProbabilityVector:
    """Parse newline-separated decimals; blank lines and '#' comments are skipped."""
    values = []
    lines = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            values.append(float(stripped))
        except ValueError:
            raise InputFormatError(f"line {line_number}", f"{stripped!r} is not a decimal number")
        lines.append(line_number)
    # value errors keep their kind; location switches from index to line
    try:
        return validate_probabilities(values)
    except OutOfUnitInterval as e:
        raise OutOfUnitInterval(e.index, e.value, location=f"line {lines[e.index - 1]}") from e
    except NotFinite as e:
        raise NotFinite(e.index, location=f"line {lines[e.index - 1]}") from e


def parse_probability_json(text: str) -> ProbabilityVector:
    """Parse a JSON document of the form {"p": [0.3, 0.31, ...]}."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"line {e.lineno}", e.msg) from e
    if not isinstance(document, dict) or "p" not in document:
        raise InputFormatError("document", 'expected an object with key "p"')
    if not isinstance(document["p"], list):
        raise InputFormatError("p", "expected a list of numbers")
    return validate_probabilities(document["p"])


def load_probabilities(path: Path) -> ProbabilityVector:
    """Read a probability vector from a text or JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputFormatError(str(path), f"cannot read file: {e.strerror}") from e
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        v = parse_probability_json(text)
    else:
        v = parse_probability_text(text)
    logger.debug(f"Loaded {v.n} probabilities from {path}")
    return v
