"""Data types and exceptions shared by the group-testing modules."""

import math
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Protocol, Sequence, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)


# Custom Exceptions


class GroupTestingError(Exception):
    """Base class for every domain error raised by the toolkit.

    Attributes:
        message: Human readable description of the failure
    """

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class EmptyInput(GroupTestingError):
    """Raised when a probability vector has no entries."""

    def __init__(self, message: Optional[str] = None):
        super().__init__(message or "Probability vector is empty")


class OutOfUnitInterval(GroupTestingError):
    """Raised when a probability is not strictly between 0 and 1.

    Attributes:
        index: 1-based position of the offending value
        value: The rejected value
        location: Where the value came from, "index 2" unless a parser says "line 3"
    """

    def __init__(
        self,
        index: int,
        value: float,
        message: Optional[str] = None,
        location: Optional[str] = None,
    ):
        self.index = index
        self.value = value
        self.location = location or f"index {index}"
        if message is None:
            message = f"Value {value!r} at {self.location} is outside the open interval (0, 1)"
        super().__init__(message)


class NotFinite(GroupTestingError):
    """Raised when a probability is NaN or infinite.

    Attributes:
        index: 1-based position of the offending value
        location: Where the value came from, "index 2" unless a parser says "line 3"
    """

    def __init__(self, index: int, message: Optional[str] = None, location: Optional[str] = None):
        self.index = index
        self.location = location or f"index {index}"
        super().__init__(message or f"Value at {self.location} is not a finite number")


class InputFormatError(GroupTestingError):
    """Raised when an input file or document cannot be parsed.

    Attributes:
        location: Where parsing failed, e.g. "line 3" or "index 2"
        detail: What was wrong at that location
    """

    def __init__(self, location: str, detail: str):
        self.location = location
        self.detail = detail
        super().__init__(f"Invalid input at {location}: {detail}")


class LengthMismatch(GroupTestingError):
    """Raised when paired sequences disagree in length.

    Attributes:
        expected: Length required by the probability vector
        actual: Length that was supplied
    """

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Length mismatch: expected {expected} entries, got {actual}")


class IndexOutOfRange(GroupTestingError):
    """Raised when a 1-based unit index falls outside 1..n."""

    def __init__(self, index: int, n: int):
        self.index = index
        self.n = n
        super().__init__(f"Index {index} is outside 1..{n}")


class NotSorted(GroupTestingError):
    """Raised when an operation needs p_1 <= ... <= p_n and the input is not.

    Attributes:
        index: 1-based position i with p_i > p_{i+1}
    """

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Probabilities are not non-decreasing: p_{index} > p_{index + 1}")


class TooSmall(GroupTestingError):
    """Raised when n is below the minimum an operation is defined for."""

    def __init__(self, n: int, minimum: int):
        self.n = n
        self.minimum = minimum
        super().__init__(f"n = {n} is too small (need n >= {minimum})")


class TooLarge(GroupTestingError):
    """Raised when n exceeds the cap of an exhaustive computation."""

    def __init__(self, n: int, maximum: int):
        self.n = n
        self.maximum = maximum
        super().__init__(f"n = {n} is too large for exhaustive evaluation (cap {maximum})")


class MisclassifiedPattern(GroupTestingError):
    """Raised when a policy's classification disagrees with the true pattern."""

    def __init__(self, pattern: Sequence[bool], classification: Sequence[bool]):
        self.pattern = tuple(pattern)
        self.classification = tuple(classification)
        truth = "".join("1" if b else "0" for b in self.pattern)
        got = "".join("1" if b else "0" for b in self.classification)
        super().__init__(f"Policy misclassified pattern {truth} as {got}")


class LeafCountMismatch(GroupTestingError):
    """Raised when a tree and a weight vector disagree on n."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Tree has {actual} leaves but {expected} weights were given")


class InvalidTree(GroupTestingError):
    """Raised when a strategy tree is not a valid ordered nested procedure."""

    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"Invalid strategy tree: {detail}")


class UnknownPolicy(GroupTestingError):
    """Raised for a policy name the simulator does not know."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown policy: {name}")


class UnknownCheck(GroupTestingError):
    """Raised for a verification check name that is not registered."""

    def __init__(self, name: str, known: Sequence[str] = ()):
        self.name = name
        suffix = f" (known: {', '.join(known)})" if known else ""
        super().__init__(f"Unknown check: {name}{suffix}")


Openness = Literal["open", "closed"]

Outcome = Literal["pure", "contaminated"]

Verdict = Literal["optimal_and_unique", "optimal_not_unique", "suboptimal"]


def _check_probabilities(raw: Any) -> Tuple[float, ...]:
    """Validate raw input into a tuple of floats in (0, 1), reporting 1-based indices."""
    if isinstance(raw, (str, bytes)):
        raise InputFormatError("input", "expected a sequence of numbers, got a string")
    values = list(raw)
    if not values:
        raise EmptyInput()
    checked = []
    for index, value in enumerate(values, start=1):
        if isinstance(value, bool):
            raise InputFormatError(f"index {index}", f"{value!r} is not a number")
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise InputFormatError(f"index {index}", f"{value!r} is not a number")
        if not math.isfinite(number):
            raise NotFinite(index)
        if not 0.0 < number < 1.0:
            raise OutOfUnitInterval(index, number)
        checked.append(number)
    return tuple(checked)


class ProbabilityVector(BaseModel):
    """Ordered defect probabilities p_1..p_n of independent units."""

    model_config = ConfigDict(frozen=True)

    p: Tuple[float, ...]

    @field_validator("p", mode="before")
    @classmethod
    def _validate_p(cls, value: Any) -> Tuple[float, ...]:
        return _check_probabilities(value)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def q(self) -> Tuple[float, ...]:
        return tuple(1.0 - x for x in self.p)

    def __len__(self) -> int:
        return len(self.p)


class DefectPattern(BaseModel):
    """Ground-truth state of every unit; True marks a defective unit."""

    model_config = ConfigDict(frozen=True)

    bits: Tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.bits)

    @classmethod
    def from_string(cls, text: str) -> "DefectPattern":
        """Build from a string of 0/1 characters, e.g. "101".

        Raises:
            InputFormatError: text is empty or holds anything besides 0 and 1
        """
        text = text.strip()
        if not text:
            raise InputFormatError("pattern", "empty defect pattern")
        for position, ch in enumerate(text, start=1):
            if ch not in "01":
                raise InputFormatError(f"pattern position {position}", f"{ch!r} is not 0 or 1")
        return cls(bits=tuple(ch == "1" for ch in text))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


class AdmissibleInterval(BaseModel):
    """The regime 1 - 1/sqrt(2) < p < (3 - sqrt(5))/2 of the pairwise optimality result."""

    model_config = ConfigDict(frozen=True)

    openness: Openness = "open"

    @computed_field  # type: ignore[prop-decorator]
    @property
    def lower(self) -> float:
        return 1.0 - 1.0 / math.sqrt(2.0)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def upper(self) -> float:
        return (3.0 - math.sqrt(5.0)) / 2.0

    def contains(self, x: float) -> bool:
        # exact comparisons: endpoint membership is what openness controls
        if self.openness == "open":
            return self.lower < x < self.upper
        return self.lower <= x <= self.upper


class TestRecord(BaseModel):
    """One group test: the contiguous unit range and its outcome."""

    __test__ = False  # keep pytest from collecting this class

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    first: int = Field(alias="from")
    last: int = Field(alias="to")
    outcome: Outcome


class TestLog(BaseModel):
    """Ordered record of the tests a policy performed on one pattern."""

    __test__ = False

    model_config = ConfigDict(frozen=True)

    tests: List[TestRecord] = []

    @computed_field  # type: ignore[prop-decorator]
    @property
    def total(self) -> int:
        return len(self.tests)

    @model_validator(mode="before")
    @classmethod
    def _drop_total(cls, data: Any) -> Any:
        # total is derived; accept it on input so JSON round-trips
        if isinstance(data, dict) and "total" in data:
            data = dict(data)
            total = data.pop("total")
            if total != len(data.get("tests", [])):
                raise ValueError(f"total {total} does not match the number of tests")
        return data


class DeltaVector(BaseModel):
    """Marginal costs Delta_{i:n} = t_{i:n} - t_{i+1:n}, i = 1..n."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    def at(self, i: int) -> float:
        """Return Delta_{i:n} for 1-based i."""
        if not 1 <= i <= len(self.values):
            raise IndexOutOfRange(i, len(self.values))
        return self.values[i - 1]

    @property
    def n(self) -> int:
        return len(self.values)


class WeightVector(BaseModel):
    """Positive leaf weights of an alphabetic tree."""

    model_config = ConfigDict(frozen=True)

    w: Tuple[float, ...]

    @field_validator("w")
    @classmethod
    def _positive(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise EmptyInput("Weight vector is empty")
        for index, x in enumerate(value, start=1):
            if not math.isfinite(x):
                raise NotFinite(index)
            if x <= 0.0:
                raise InputFormatError(f"index {index}", f"weight {x!r} is not positive")
        return value

    @property
    def n(self) -> int:
        return len(self.w)


class Partition(BaseModel):
    """Ordered partition of units 1..n into contiguous groups (first, last)."""

    model_config = ConfigDict(frozen=True)

    n: int
    groups: Tuple[Tuple[int, int], ...]

    @model_validator(mode="after")
    def _covering(self) -> "Partition":
        expected = 1
        for first, last in self.groups:
            if first != expected or last < first:
                raise ValueError(f"group ({first}, {last}) breaks contiguity at unit {expected}")
            expected = last + 1
        if expected != self.n + 1:
            raise ValueError(f"groups cover 1..{expected - 1}, expected 1..{self.n}")
        return self

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(last - first + 1 for first, last in self.groups)


class PartitionResult(BaseModel):
    """Best contiguous partition found by the Hwang dynamic program."""

    policy: Literal["dorfman", "modified_dorfman"]
    partition: Partition
    cost: float
    heuristic: bool = False


class OptimalityVerdict(BaseModel):
    """Outcome of comparing the DP optimum against the pairwise algorithm."""

    verdict: Verdict
    dp_cost: float
    gpta_cost: float
    gap: float
    tolerance: float
    first_move: int


class McReport(BaseModel):
    """Monte Carlo estimate of the expected number of tests for one policy.

    Field order is the column order of the CSV rendering.
    """

    policy: str
    n: int
    replications: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    mean: float
    stddev: float
    stderr: float
    exact: Optional[float] = None
    z_score: Optional[float] = None


class SweepRow(BaseModel):
    """Expected test counts of every policy at one homogeneous p."""

    p: float
    gpta_t: float
    dp_t: float
    individual: float
    dorfman: float
    mdorfman: float


class OrderingReport(BaseModel):
    """Best input ordering found by brute force."""

    policy: Literal["gpta", "dp_optimal"]
    permutation: Tuple[int, ...]
    cost: float
    given_order_cost: float
    sorted_order_cost: float
    orderings: int


class VerifySummary(BaseModel):
    """Pass/fail tally of one property sweep."""

    check: str
    trials: int
    passed: int
    failed: int
    seed: int
    counterexample: Optional[List[float]] = None
    detail: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failed == 0


class PolicyTrace(NamedTuple):
    """Raw result of running a policy on one pattern (0-based units)."""

    tests: List[Tuple[Tuple[int, ...], bool]]
    classification: List[bool]


class TestingPolicy(Protocol):
    """Anything that classifies every unit of a pattern with group tests."""

    name: str

    def run(self, p: Sequence[float], bits: Sequence[bool]) -> PolicyTrace:
        ...

    def exact(self, v: ProbabilityVector) -> Optional[float]:
        ...


InputSource = Literal["inline", "file", "homogeneous"]


class RunConfig(BaseModel):
    """Resolved settings of one CLI invocation."""

    subcommand: str
    p: Optional[List[float]] = None
    input: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=1)
    p_const: Optional[float] = None
    seed: int = Field(default=0, ge=0, lt=2**64)
    reps: int = Field(default=100_000, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    format: Literal["json", "csv"] = "json"
    out: Optional[str] = None
    workers: int = Field(default=1, ge=1)
    sort: bool = False
    extra: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _one_source(self) -> "RunConfig":
        sources = [
            self.p is not None,
            self.input is not None,
            self.n is not None or self.p_const is not None,
        ]
        if self.subcommand in NO_INPUT_SUBCOMMANDS:
            return self
        if sum(sources) != 1:
            raise ValueError("give exactly one input source: --p, --input, or --n with --p-const")
        if sources[2] and (self.n is None or self.p_const is None):
            raise ValueError("--n and --p-const must be given together")
        return self

    @property
    def source(self) -> InputSource:
        if self.p is not None:
            return "inline"
        if self.input is not None:
            return "file"
        return "homogeneous"


# Subcommands that do not read a probability vector
NO_INPUT_SUBCOMMANDS = frozenset({"verify", "sweep"})
