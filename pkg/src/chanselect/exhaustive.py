"""Brute-force enumeration of every nonempty subset.

Ground truth for the other searches: returns the exact constrained optimum
regardless of monotonicity. Guarded to n <= 20 since it always performs
2^n - 1 evaluations.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionMismatch, SearchSpaceTooLarge
from .evaluators import PerformanceFunction
from .model import (
    ChannelSet,
    CostModel,
    EvaluatedSubset,
    ScoreParams,
    best_key,
    score,
)

MAX_EXHAUSTIVE_N = 20


@dataclass
class ExhaustiveOutcome:
    best: EvaluatedSubset | None
    feasible: list[EvaluatedSubset]
    evaluations: int


def exhaustive_search(
    n: int,
    model: CostModel,
    f: PerformanceFunction,
    lam: float,
    params: ScoreParams,
) -> ExhaustiveOutcome:
    """Evaluate all 2^n - 1 nonempty subsets in ascending bitmask order."""
    if n > MAX_EXHAUSTIVE_N:
        raise SearchSpaceTooLarge(n, MAX_EXHAUSTIVE_N)
    if model.n != n:
        raise DimensionMismatch(f"cost model has {model.n} channels, expected {n}")
    weights = model.weights
    feasible: list[EvaluatedSubset] = []
    evaluations = 0
    for bits in range(1, 1 << n):
        s = ChannelSet(bits, n)
        fval = f.evaluate(s)
        evaluations += 1
        if fval >= lam:
            cost = 0.0
            b, i = bits, 0
            while b:
                if b & 1:
                    cost += weights[i]
                b >>= 1
                i += 1
            feasible.append(EvaluatedSubset(s, fval, cost, score(fval, cost, params)))
    best = min(feasible, key=best_key) if feasible else None
    return ExhaustiveOutcome(best=best, feasible=feasible, evaluations=evaluations)
