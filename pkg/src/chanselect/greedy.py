"""Greedy backward channel elimination driven by the blended score.

Starting from the full set, each stage evaluates every remove-one child,
keeps those meeting the performance threshold, and descends into the one with
the lowest score. The walk continues past score plateaus; the returned best
is the minimum-score node seen anywhere on the descent path. At most
n(n+1)/2 evaluations are performed.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch
from .evaluators import MemoizedEvaluator, PerformanceFunction, memoize
from .model import (
    ChannelSet,
    CostModel,
    Direction,
    EvaluatedSubset,
    ScoreParams,
    score,
)


@dataclass
class GreedyOutcome:
    """Descent result. path[0] is the full set; each later entry removes one
    more channel. root_feasible is False when even the full set misses the
    threshold, in which case best is the (infeasible) full set itself."""

    best: EvaluatedSubset
    path: list[EvaluatedSubset]
    evaluations: int
    root_feasible: bool = True


def _score_key(e: EvaluatedSubset) -> tuple:
    return (e.score, e.cost, e.subset.bits)


def greedy_select(
    n: int,
    model: CostModel,
    f: PerformanceFunction,
    lam: float,
    params: ScoreParams,
) -> GreedyOutcome:
    """Locally optimal subset with performance >= lam and low blended score."""
    if model.n != n:
        raise DimensionMismatch(f"cost model has {model.n} channels, expected {n}")
    weights = model.weights
    full = ChannelSet.full(n)
    root_cost = sum(weights)
    root_f = f.evaluate(full)
    evaluations = 1
    root = EvaluatedSubset(full, root_f, root_cost, score(root_f, root_cost, params))
    if root_f < lam:
        return GreedyOutcome(best=root, path=[root], evaluations=1, root_feasible=False)

    path = [root]
    current = root
    while current.subset.cardinality > 1:
        candidates: list[EvaluatedSubset] = []
        bits = current.subset.bits
        for i in range(n):
            mask = 1 << i
            if bits & mask:
                child = ChannelSet(bits & ~mask, n)
                fval = f.evaluate(child)
                evaluations += 1
                if fval >= lam:
                    # ascending-index sum, bit-identical to subset_cost()
                    cost = 0.0
                    b, j = child.bits, 0
                    while b:
                        if b & 1:
                            cost += weights[j]
                        b >>= 1
                        j += 1
                    candidates.append(
                        EvaluatedSubset(child, fval, cost, score(fval, cost, params))
                    )
        if not candidates:
            break
        current = min(candidates, key=_score_key)
        path.append(current)

    best = min(path, key=_score_key)
    return GreedyOutcome(best=best, path=path, evaluations=evaluations)


def alpha_sweep(
    n: int,
    model: CostModel,
    f: PerformanceFunction,
    lam: float,
    alphas: Sequence[float],
    direction: Direction = Direction.MAXIMIZE,
) -> list[tuple[float, GreedyOutcome]]:
    """Run greedy_select once per alpha, sharing one memoized evaluator."""
    evaluator = f if isinstance(f, MemoizedEvaluator) else memoize(f)
    results = []
    for alpha in alphas:
        params = ScoreParams(alpha=alpha, lam=lam, direction=direction)
        results.append((alpha, greedy_select(n, model, evaluator, lam, params)))
    return results


def alpha_sweep_csv(
    results: Sequence[tuple[float, GreedyOutcome]], channel_names: Sequence[str]
) -> str:
    """Render sweep results as the plot-ready CSV (one row per alpha)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "accuracy", "cost", "score", "num_channels", "channels"])
    for alpha, outcome in results:
        best = outcome.best
        writer.writerow(
            [
                repr(float(alpha)),
                repr(best.performance),
                repr(best.cost),
                repr(best.score),
                best.subset.cardinality,
                ";".join(best.subset.names(channel_names)),
            ]
        )
    return buf.getvalue()
