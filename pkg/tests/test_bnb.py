import random

import pytest

from chanselect import (
    ChannelSet,
    ScoreParams,
    SyntheticMonotoneFunction,
    TableOracle,
    branch_and_bound,
    equal_costs,
    exhaustive_search,
    memoize,
    normalize_costs,
    verify_pruning_soundness,
)
from chanselect.errors import MalformedTrace
from chanselect.evaluators import PerformanceFunction


def _params(lam, alpha=0.5):
    return ScoreParams(alpha=alpha, lam=lam)


def _random_model(n, rng, equal=False):
    if equal:
        return equal_costs(n)
    return normalize_costs([rng.uniform(0.2, 5.0) for _ in range(n)])


class _ConstantZero(PerformanceFunction):
    claims_monotone = True

    def evaluate(self, s):
        return 0.0


class TestInfeasibleRoot:
    def test_short_circuit(self):
        out = branch_and_bound(6, equal_costs(6), _ConstantZero(), 0.5, _params(0.5))
        assert out.best is None
        assert out.feasible == []
        assert out.stats.evaluations == 1

    def test_infeasible_root_trace(self):
        trace = []
        branch_and_bound(4, equal_costs(4), _ConstantZero(), 0.5, _params(0.5), trace=trace)
        assert len(trace) == 1 and trace[0]["action"] == "pruned"


class TestOptimality:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_exhaustive_on_monotone_instances(self, seed):
        rng = random.Random(seed)
        n = rng.randint(4, 10)
        f = SyntheticMonotoneFunction.random(n, seed, low=0.05, high=0.8)
        model = _random_model(n, rng, equal=seed % 2 == 0)
        lam = rng.uniform(0.3, 0.98)
        params = _params(lam)
        got = branch_and_bound(n, model, f, lam, params)
        want = exhaustive_search(n, model, f, lam, params)
        if want.best is None:
            assert got.best is None
        else:
            assert got.best.subset == want.best.subset
            assert got.best.cost == want.best.cost
            assert got.best.performance == want.best.performance

    def test_seeded_8_channel_instance(self):
        f = SyntheticMonotoneFunction.random(8, 7)
        params = _params(0.6)
        got = branch_and_bound(8, equal_costs(8), f, 0.6, params)
        want = exhaustive_search(8, equal_costs(8), f, 0.6, params)
        assert got.best.subset == want.best.subset

    def test_feasible_list_complete_without_pruning(self):
        # lam below every singleton: nothing prunable, C_o is every subset
        f = SyntheticMonotoneFunction.random(7, 3, low=0.4, high=0.9)
        params = _params(0.1)
        got = branch_and_bound(7, equal_costs(7), f, 0.1, params)
        want = exhaustive_search(7, equal_costs(7), f, 0.1, params)
        assert got.stats.evaluations == (1 << 7) - 1
        assert {e.subset.bits for e in got.feasible} == {e.subset.bits for e in want.feasible}

    def test_feasible_subset_of_exhaustive(self):
        f = SyntheticMonotoneFunction.random(8, 11, low=0.05, high=0.6)
        params = _params(0.55)
        got = branch_and_bound(8, equal_costs(8), f, 0.55, params)
        want = exhaustive_search(8, equal_costs(8), f, 0.55, params)
        bnb_bits = {e.subset.bits for e in got.feasible}
        exh_bits = {e.subset.bits for e in want.feasible}
        assert bnb_bits <= exh_bits


class TestOutcomeShape:
    def test_best_in_feasible_and_sorted(self):
        f = SyntheticMonotoneFunction.random(7, 2)
        out = branch_and_bound(7, equal_costs(7), f, 0.5, _params(0.5))
        assert out.best in out.feasible
        costs = [e.cost for e in out.feasible]
        assert costs == sorted(costs)
        for a, b in zip(out.feasible, out.feasible[1:]):
            if a.cost == b.cost:
                assert a.performance >= b.performance
        bits = [e.subset.bits for e in out.feasible]
        assert len(bits) == len(set(bits))

    def test_every_feasible_meets_threshold(self):
        f = SyntheticMonotoneFunction.random(6, 13)
        out = branch_and_bound(6, equal_costs(6), f, 0.6, _params(0.6))
        assert all(e.performance >= 0.6 for e in out.feasible)

    def test_determinism(self):
        rng = random.Random(5)
        model = _random_model(8, rng)
        f = SyntheticMonotoneFunction.random(8, 5)
        a = branch_and_bound(8, model, f, 0.6, _params(0.6))
        b = branch_and_bound(8, model, f, 0.6, _params(0.6))
        assert [e.subset.bits for e in a.feasible] == [e.subset.bits for e in b.feasible]
        assert a.best == b.best
        assert a.stats == b.stats

    def test_heuristic_flag_tracks_monotonicity_claim(self):
        mono = SyntheticMonotoneFunction.random(5, 1)
        assert not branch_and_bound(5, equal_costs(5), mono, 0.5, _params(0.5)).heuristic
        table = TableOracle(5, {}, default=0.8, claims_monotone=False)
        assert branch_and_bound(5, equal_costs(5), table, 0.5, _params(0.5)).heuristic

    def test_evaluations_equal_memo_misses(self):
        f = memoize(SyntheticMonotoneFunction.random(8, 17))
        out = branch_and_bound(8, equal_costs(8), f, 0.6, _params(0.6))
        assert out.stats.evaluations == f.misses
        assert f.hits == 0  # canonical descent never re-asks


class TestTraceAndPruning:
    def test_no_subset_evaluated_twice(self):
        trace = []
        f = SyntheticMonotoneFunction.random(8, 23)
        out = branch_and_bound(8, equal_costs(8), f, 0.55, _params(0.55), trace=trace)
        evaluated = [tuple(sorted(e["subset"])) for e in trace if e["action"] != "visited-skip"]
        assert len(evaluated) == len(set(evaluated)) == out.stats.evaluations

    def test_children_expanded_cheapest_first(self):
        # distinct weights: the root's children must be logged in ascending cost
        model = normalize_costs([1.0, 2.0, 4.0, 8.0])
        f = SyntheticMonotoneFunction.random(4, 0, low=0.5, high=0.9)
        trace = []
        branch_and_bound(4, model, f, 0.0, _params(0.0), trace=trace)
        root = trace[0]["subset"]
        root_children = [e for e in trace if e["parent"] == root]
        costs = [e["cost"] for e in root_children]
        assert costs == sorted(costs)

    @pytest.mark.parametrize("seed", range(50))
    def test_pruning_soundness_sweep(self, seed):
        rng = random.Random(seed + 1000)
        n = rng.randint(4, 10)
        f = SyntheticMonotoneFunction.random(n, seed, low=0.05, high=0.8)
        lam = rng.uniform(0.4, 0.95)
        trace = []
        branch_and_bound(n, _random_model(n, rng), f, lam, _params(lam), trace=trace)
        assert verify_pruning_soundness(trace, lam)

    def test_planted_violation_detected(self):
        log = [
            {"subset": ["a", "b"], "f": 0.2, "cost": 1.0, "parent": None, "action": "pruned"},
            {"subset": ["a"], "f": 0.9, "cost": 0.5, "parent": ["a", "b"], "action": "feasible"},
        ]
        assert not verify_pruning_soundness(log, 0.5)

    def test_malformed_trace(self):
        with pytest.raises(MalformedTrace):
            verify_pruning_soundness([{"subset": ["a"]}], 0.5)
        with pytest.raises(MalformedTrace):
            verify_pruning_soundness(
                [{"subset": ["a"], "f": 1.0, "parent": ["ghost"], "action": "feasible"}], 0.5
            )

    def test_prune_reduces_evaluations(self):
        # one strong channel, the rest weak: most of the lattice is pruned
        f = SyntheticMonotoneFunction([0.9] + [0.01] * 7)
        out = branch_and_bound(8, equal_costs(8), f, 0.85, _params(0.85))
        assert out.stats.nodes_pruned_infeasible >= 1
        assert out.stats.evaluations < (1 << 8) - 1
        assert out.best.subset == ChannelSet.from_indices([0], 8)
