"""Core domain types: channel subsets, cost models, and the score function.

A channel subset is a bitmask over indices 0..n-1 packed into one int, so
subsets are hashable, cheap to copy, and usable directly as cache keys.
Channel count is capped at 64 to keep that representation a single word.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    ChannelCapExceeded,
    DimensionMismatch,
    EmptyCostList,
    EmptyFile,
    MissingColumn,
    NonNumericCell,
    NonPositiveCost,
    PerformanceOutOfRange,
    UnknownChannel,
)

MAX_CHANNELS = 64

_WEIGHT_SUM_TOL = 1e-9
_COST_RANGE_TOL = 1e-9


class Direction(Enum):
    """Whether larger or smaller values of the performance function are better."""

    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


@dataclass(frozen=True)
class ChannelSet:
    """A subset of the n channels, stored as a bitmask."""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 < self.n <= MAX_CHANNELS:
            raise ChannelCapExceeded(
                f"channel count must be in 1..{MAX_CHANNELS}, got {self.n}"
            )
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bitmask {self.bits:#x} has bits outside 0..{self.n - 1}")

    @classmethod
    def full(cls, n: int) -> "ChannelSet":
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> "ChannelSet":
        return cls(0, n)

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "ChannelSet":
        bits = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"channel index {i} out of range for n={n}")
            bits |= 1 << i
        return cls(bits, n)

    @classmethod
    def from_names(cls, subset: Iterable[str], universe: Sequence[str]) -> "ChannelSet":
        index = {name: i for i, name in enumerate(universe)}
        bits = 0
        for name in subset:
            if name not in index:
                raise UnknownChannel(name)
            bits |= 1 << index[name]
        return cls(bits, len(universe))

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.bits >> i & 1)

    def names(self, universe: Sequence[str]) -> list[str]:
        if len(universe) != self.n:
            raise DimensionMismatch(f"{len(universe)} names for n={self.n}")
        return [universe[i] for i in self.indices()]

    def contains(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def without(self, i: int) -> "ChannelSet":
        return ChannelSet(self.bits & ~(1 << i), self.n)

    def issubset(self, other: "ChannelSet") -> bool:
        return self.n == other.n and self.bits & ~other.bits == 0

    def __iter__(self):
        return iter(self.indices())

    def __len__(self) -> int:
        return self.cardinality


@dataclass(frozen=True)
class CostModel:
    """Per-channel raw costs plus the normalized weights derived from them."""

    raw: tuple[float, ...]
    weights: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.raw)


@dataclass(frozen=True)
class ScoreParams:
    """Parameters of the score blend and the feasibility threshold.

    alpha balances performance against cost; lam is the performance lower
    bound; direction says whether the raw performance metric is maximized
    (accuracy-like, expected in [0,1]) or minimized (loss-like).
    """

    alpha: float
    lam: float
    direction: Direction = Direction.MAXIMIZE

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0,1], got {self.alpha}")
        if self.lam != self.lam or self.lam in (float("inf"), float("-inf")):
            raise ValueError("lam must be finite")


@dataclass(frozen=True)
class EvaluatedSubset:
    """One evaluated subset: performance, normalized cost, and blended score."""

    subset: ChannelSet
    performance: float
    cost: float
    score: float


def normalize_costs(raw: Sequence[float]) -> CostModel:
    """Build a cost model whose weights are raw costs divided by their total."""
    if len(raw) == 0:
        raise EmptyCostList("need at least one channel cost")
    if len(raw) > MAX_CHANNELS:
        raise ChannelCapExceeded(f"{len(raw)} channels exceeds the cap of {MAX_CHANNELS}")
    for i, value in enumerate(raw):
        if not value > 0:
            raise NonPositiveCost(i, value)
    total = sum(raw)
    weights = tuple(value / total for value in raw)
    assert abs(sum(weights) - 1.0) <= _WEIGHT_SUM_TOL
    return CostModel(raw=tuple(float(v) for v in raw), weights=weights)


def equal_costs(n: int) -> CostModel:
    """Cost model where every channel has the same weight 1/n."""
    return normalize_costs([1.0] * n)


def subset_cost(model: CostModel, s: ChannelSet) -> float:
    """Sum of normalized weights over the channels in s."""
    if s.n != model.n:
        raise DimensionMismatch(f"subset over {s.n} channels vs model with {model.n}")
    weights = model.weights
    bits = s.bits
    total = 0.0
    i = 0
    while bits:
        if bits & 1:
            total += weights[i]
        bits >>= 1
        i += 1
    return total


def cost_savings(model: CostModel, s: ChannelSet) -> float:
    """Fraction of total normalized cost saved by dropping the complement of s."""
    return 1.0 - subset_cost(model, s)


def savings_from_cost(cost: float) -> float:
    """Savings implied by an already-computed normalized subset cost."""
    return 1.0 - cost


def score(perf: float, cost: float, params: ScoreParams) -> float:
    """Blend performance and cost into a single value; lower is always better.

    Maximize direction uses alpha*(1-perf) + (1-alpha)*cost so that better
    accuracy lowers the score; Minimize uses alpha*perf + (1-alpha)*cost.
    """
    if not -_COST_RANGE_TOL <= cost <= 1.0 + _COST_RANGE_TOL:
        raise ValueError(f"cost must be in [0,1], got {cost}")
    if params.direction is Direction.MAXIMIZE:
        if not 0.0 <= perf <= 1.0:
            raise PerformanceOutOfRange(
                f"performance {perf} outside [0,1] with direction=maximize"
            )
        return params.alpha * (1.0 - perf) + (1.0 - params.alpha) * cost
    return params.alpha * perf + (1.0 - params.alpha) * cost


def children(s: ChannelSet, min_removable_index: int = 0) -> list[ChannelSet]:
    """Remove-one children of s, one per member channel >= min_removable_index.

    Returned in ascending order of the removed index. Restricting removals to
    indices above the last removed one makes the descent tree canonical: every
    subset of the root is generated exactly once.
    """
    if s.bits == 0:
        raise ValueError("cannot generate children of the empty subset")
    out = []
    for i in range(max(min_removable_index, 0), s.n):
        if s.bits >> i & 1:
            out.append(ChannelSet(s.bits & ~(1 << i), s.n))
    return out


def evaluate_subset(
    s: ChannelSet, performance: float, model: CostModel, params: ScoreParams
) -> EvaluatedSubset:
    """Package a subset with its cost and score given a measured performance."""
    cost = subset_cost(model, s)
    return EvaluatedSubset(
        subset=s, performance=performance, cost=cost, score=score(performance, cost, params)
    )


def best_key(e: EvaluatedSubset) -> tuple:
    """Ordering for 'best' subsets: min cost, then max performance, then bitmask."""
    return (e.cost, -e.performance, e.subset.bits)


def load_cost_model_csv(path) -> tuple[list[str], CostModel]:
    """Read a `channel,raw_cost` CSV; row order defines channel indices."""
    names: list[str] = []
    raw: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path} is empty")
        header = [h.strip() for h in header]
        for col in ("channel", "raw_cost"):
            if col not in header:
                raise MissingColumn(col)
        name_col = header.index("channel")
        cost_col = header.index("raw_cost")
        for row_no, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            name = row[name_col].strip()
            if name in names:
                raise ValueError(f"duplicate channel name {name!r} in {path}")
            try:
                value = float(row[cost_col])
            except ValueError:
                raise NonNumericCell(row_no, "raw_cost") from None
            names.append(name)
            raw.append(value)
    if not names:
        raise EmptyCostList(f"no channel rows in {path}")
    return names, normalize_costs(raw)
