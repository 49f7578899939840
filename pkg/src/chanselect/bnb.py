"""Branch-and-bound search for the minimum-cost feasible channel subset.

The descent is a canonical depth-first walk of the subset lattice: a child is
formed by removing one channel whose index is strictly greater than the
deepest index already removed, so every subset below the root is generated at
most once. Whenever a node's performance falls below the threshold, its whole
subtree is infeasible under a monotone performance function and is skipped.
Children of a node are expanded cheapest-first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, MalformedTrace
from .evaluators import MemoizedEvaluator, PerformanceFunction, memoize
from .model import (
    ChannelSet,
    CostModel,
    EvaluatedSubset,
    ScoreParams,
    score,
)


@dataclass
class BnbStats:
    evaluations: int = 0
    nodes_pruned_infeasible: int = 0
    nodes_skipped_visited: int = 0
    max_stack_depth: int = 0


@dataclass
class BnbOutcome:
    """Result of the branch-and-bound run.

    best is absent when even the full set misses the threshold. feasible holds
    every feasible subset encountered, sorted by ascending cost then descending
    performance; it enables falling back to the next-best subset when channels
    of the optimum become unavailable at run time. heuristic is True when the
    evaluator did not claim monotonicity, in which case pruning may have
    discarded feasible subsets and best is not guaranteed globally optimal.
    """

    best: EvaluatedSubset | None
    feasible: list[EvaluatedSubset]
    stats: BnbStats
    heuristic: bool = False


def _default_names(n: int) -> list[str]:
    return [f"c{i}" for i in range(n)]


def branch_and_bound(
    n: int,
    model: CostModel,
    f: PerformanceFunction,
    lam: float,
    params: ScoreParams,
    trace: list | None = None,
    channel_names: Sequence[str] | None = None,
) -> BnbOutcome:
    """Find the minimum-cost subset with performance >= lam.

    When f.claims_monotone, the returned best is the exact global optimum of
    the constrained problem. trace, if given, receives one dict per visited
    node ({"subset","f","cost","parent","action"}) suitable for the JSON-lines
    node log and for verify_pruning_soundness.
    """
    if model.n != n:
        raise DimensionMismatch(f"cost model has {model.n} channels, expected {n}")
    names = list(channel_names) if channel_names is not None else _default_names(n)
    evaluator = f if isinstance(f, MemoizedEvaluator) else memoize(f)
    weights = model.weights
    stats = BnbStats()

    def log(bits: int, fval: float, cost: float, parent_bits: int | None, action: str):
        trace.append(
            {
                "subset": [names[i] for i in range(n) if bits >> i & 1],
                "f": fval,
                "cost": cost,
                "parent": None
                if parent_bits is None
                else [names[i] for i in range(n) if parent_bits >> i & 1],
                "action": action,
            }
        )

    full_bits = (1 << n) - 1
    root_cost = sum(weights)
    root_f = evaluator.evaluate(ChannelSet(full_bits, n))
    stats.evaluations = 1
    if root_f < lam:
        if trace is not None:
            log(full_bits, root_f, root_cost, None, "pruned")
        return BnbOutcome(None, [], stats, heuristic=not f.claims_monotone)
    if trace is not None:
        log(full_bits, root_f, root_cost, None, "feasible")

    # (bits, performance, cost) per feasible node; wrapped into EvaluatedSubset
    # at the end to keep the hot loop lean.
    feasible_raw: list[tuple[int, float, float]] = [(full_bits, root_f, root_cost)]
    visited = {full_bits}
    # stack entries: (bits, min_removable_index, cost, descent depth)
    stack: list[tuple[int, int, float, int]] = [(full_bits, 0, root_cost, 1)]
    stats.max_stack_depth = 1
    ev = evaluator.evaluate
    tracing = trace is not None

    while stack:
        bits, min_rm, cost, depth = stack.pop()
        if depth > stats.max_stack_depth:
            stats.max_stack_depth = depth
        # children: remove one channel with index >= min_rm, cheapest first
        kids: list[tuple[float, int, int]] = []
        for i in range(min_rm, n):
            mask = 1 << i
            if bits & mask:
                child = bits & ~mask
                if child:
                    kids.append((cost - weights[i], i, child))
        kids.sort()
        descend: list[tuple[int, int, float, int]] = []
        for approx_cost, i, child_bits in kids:
            if child_bits in visited:
                stats.nodes_skipped_visited += 1
                if tracing:
                    log(child_bits, float("nan"), approx_cost, bits, "visited-skip")
                continue
            visited.add(child_bits)
            fval = ev(ChannelSet(child_bits, n))
            stats.evaluations += 1
            # reported costs are always the ascending-index sum, so they are
            # bit-identical to subset_cost() regardless of descent order
            child_cost = 0.0
            b, j = child_bits, 0
            while b:
                if b & 1:
                    child_cost += weights[j]
                b >>= 1
                j += 1
            if fval < lam:
                stats.nodes_pruned_infeasible += 1
                if tracing:
                    log(child_bits, fval, child_cost, bits, "pruned")
            else:
                feasible_raw.append((child_bits, fval, child_cost))
                if tracing:
                    log(child_bits, fval, child_cost, bits, "feasible")
                descend.append((child_bits, i + 1, child_cost, depth + 1))
        # push in reverse so the cheapest child is expanded first
        for entry in reversed(descend):
            stack.append(entry)

    # sort on the raw tuples, then materialize once; the first entry is the
    # best under the same (cost, -performance, bitmask) ordering as best_key
    feasible_raw.sort(key=lambda t: (t[2], -t[1], t[0]))
    feasible = [
        EvaluatedSubset(
            subset=ChannelSet(bits, n),
            performance=perf,
            cost=cost,
            score=score(perf, cost, params),
        )
        for bits, perf, cost in feasible_raw
    ]
    return BnbOutcome(feasible[0], feasible, stats, heuristic=not f.claims_monotone)


def verify_pruning_soundness(node_log: list[dict], lam: float) -> bool:
    """True iff no logged node has an ancestor whose performance is below lam.

    Test harness for the pruning rule: a sound run never generates descendants
    of an infeasible node. Raises MalformedTrace on missing fields or a parent
    that was never logged.
    """
    values: dict[frozenset, float] = {}
    parents: dict[frozenset, frozenset | None] = {}
    for entry in node_log:
        try:
            subset = frozenset(entry["subset"])
            fval = entry["f"]
            parent = entry["parent"]
            entry["action"]
        except (KeyError, TypeError) as exc:
            raise MalformedTrace(f"node log entry missing field: {exc}") from exc
        parent_key = None if parent is None else frozenset(parent)
        if parent_key is not None and parent_key not in values:
            raise MalformedTrace(f"parent {sorted(parent_key)} not logged before child")
        if entry["action"] != "visited-skip":
            values[subset] = fval
            parents[subset] = parent_key
    for subset in values:
        ancestor = parents[subset]
        while ancestor is not None:
            if values[ancestor] < lam:
                return False
            ancestor = parents[ancestor]
    return True
