import random

import pytest

from chanselect import (
    ChannelSet,
    Direction,
    ScoreParams,
    SyntheticMonotoneFunction,
    TableOracle,
    alpha_sweep,
    alpha_sweep_csv,
    equal_costs,
    exhaustive_search,
    greedy_select,
    memoize,
    normalize_costs,
    score,
    subset_cost,
)


def _params(lam, alpha=0.5):
    return ScoreParams(alpha=alpha, lam=lam)


class TestDescent:
    def test_constant_perfect_performance_descends_to_singleton(self):
        # cost is the only differentiator, so the walk bottoms out
        f = TableOracle(5, {}, default=1.0)
        out = greedy_select(5, equal_costs(5), f, 0.5, _params(0.5))
        assert out.best.subset.cardinality == 1
        assert out.best.score == pytest.approx(0.5 * 0.0 + 0.5 * (1 / 5))
        assert len(out.path) == 5

    def test_infeasible_root_flagged(self):
        f = TableOracle(4, {}, default=0.2)
        out = greedy_select(4, equal_costs(4), f, 0.9, _params(0.9))
        assert not out.root_feasible
        assert out.evaluations == 1
        assert out.best.subset == ChannelSet.full(4)
        assert out.path == [out.best]

    def test_path_structure(self):
        f = SyntheticMonotoneFunction.random(8, 3)
        out = greedy_select(8, equal_costs(8), f, 0.5, _params(0.5))
        assert out.path[0].subset == ChannelSet.full(8)
        assert len(out.path) <= 8
        for a, b in zip(out.path, out.path[1:]):
            assert b.subset.issubset(a.subset)
            assert a.subset.cardinality - b.subset.cardinality == 1

    def test_every_path_entry_feasible(self):
        f = SyntheticMonotoneFunction.random(9, 5)
        lam = 0.6
        out = greedy_select(9, equal_costs(9), f, lam, _params(lam))
        assert all(e.performance >= lam for e in out.path)

    def test_best_is_min_score_on_path(self):
        f = SyntheticMonotoneFunction.random(9, 8)
        out = greedy_select(9, equal_costs(9), f, 0.55, _params(0.55))
        assert out.best.score == min(e.score for e in out.path)

    def test_descent_crosses_score_plateaus(self):
        # stage scores rise again after the minimum; the walk must continue
        # while feasible children exist and still return the earlier minimum
        entries = {
            0b111: 0.9,   # full set
            0b011: 0.88,  # stage 1 winner
            0b101: 0.5,
            0b110: 0.5,
            0b001: 0.84,  # stage 2: feasible but worse score than {0,1}
            0b010: 0.5,
        }
        f = TableOracle(3, entries)
        model = equal_costs(3)
        lam = 0.6
        out = greedy_select(3, model, f, lam, _params(lam, alpha=0.9))
        assert [e.subset.bits for e in out.path] == [0b111, 0b011, 0b001]
        assert out.best.subset.bits == 0b011

    def test_tie_breaks_toward_lower_cost_then_bitmask(self):
        # equal f everywhere and distinct weights: pick the cheapest child
        f = TableOracle(3, {}, default=1.0)
        model = normalize_costs([1.0, 2.0, 4.0])
        out = greedy_select(3, model, f, 0.5, _params(0.5))
        # first removal drops the most expensive channel (index 2)
        assert out.path[1].subset.bits == 0b011
        # equal weights: equal scores, smaller bitmask wins
        out_eq = greedy_select(3, equal_costs(3), f, 0.5, _params(0.5))
        assert out_eq.path[1].subset.bits == 0b011


class TestBoundsAndConsistency:
    @pytest.mark.parametrize("seed", range(20))
    def test_evaluation_bound(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 12)
        f = SyntheticMonotoneFunction.random(n, seed)
        lam = rng.uniform(0.2, 0.95)
        out = greedy_select(n, equal_costs(n), f, lam, _params(lam))
        assert out.evaluations <= n * (n + 1) // 2

    def test_score_consistency(self):
        rng = random.Random(2)
        model = normalize_costs([rng.uniform(0.5, 3.0) for _ in range(8)])
        f = SyntheticMonotoneFunction.random(8, 2)
        params = _params(0.5, alpha=0.3)
        out = greedy_select(8, model, f, 0.5, params)
        for e in out.path:
            assert e.cost == pytest.approx(subset_cost(model, e.subset), abs=1e-12)
            assert e.score == pytest.approx(score(e.performance, e.cost, params), abs=1e-12)

    def test_greedy_never_beats_exhaustive_score(self):
        f = SyntheticMonotoneFunction.random(8, 7)
        params = _params(0.6)
        greedy = greedy_select(8, equal_costs(8), f, 0.6, params)
        exhaustive = exhaustive_search(8, equal_costs(8), f, 0.6, params)
        optimum = min(e.score for e in exhaustive.feasible)
        assert greedy.best.score >= optimum - 1e-12
        assert greedy.best.performance >= 0.6

    def test_rescaling_raw_costs_changes_nothing(self):
        rng = random.Random(4)
        raw = [rng.uniform(0.5, 10.0) for _ in range(7)]
        f = SyntheticMonotoneFunction.random(7, 4)
        params = _params(0.5)
        base = greedy_select(7, normalize_costs(raw), f, 0.5, params)
        scaled = greedy_select(7, normalize_costs([37.0 * r for r in raw]), f, 0.5, params)
        assert base.best.subset == scaled.best.subset
        assert [e.subset.bits for e in base.path] == [e.subset.bits for e in scaled.path]


class TestAlphaSweep:
    def test_alpha_one_maximizes_child_performance(self):
        # unequal costs, alpha=1: cost must be ignored at every stage
        entries = {
            0b111: 0.99,
            0b011: 0.90, 0b101: 0.95, 0b110: 0.80,
            0b001: 0.70, 0b100: 0.85,
        }
        f = TableOracle(3, entries, default=0.0)
        model = normalize_costs([1.0, 1.0, 10.0])  # channel 2 expensive
        [(_, out)] = alpha_sweep(3, model, f, 0.0, [1.0])
        # keeps the expensive channel because 0b101 has the best performance
        assert out.path[1].subset.bits == 0b101

    def test_alpha_zero_descends_to_cheapest(self):
        f = TableOracle(3, {}, default=0.9)
        model = normalize_costs([1.0, 5.0, 25.0])
        [(_, out)] = alpha_sweep(3, model, f, 0.5, [0.0])
        assert out.best.subset.bits == 0b001  # cheapest singleton

    def test_sweep_shares_memoized_evaluations(self):
        f = memoize(SyntheticMonotoneFunction.random(6, 6))
        alphas = [0.1 * k for k in range(1, 10)]
        results = alpha_sweep(6, equal_costs(6), f, 0.3, alphas, Direction.MAXIMIZE)
        assert len(results) == 9
        # the lattice holds only 2^6-1 subsets; without sharing, nine runs
        # would need up to 9*21 evaluations
        assert f.misses <= (1 << 6) - 1

    def test_cost_nondecreasing_in_alpha_on_synthetic_instance(self):
        f = SyntheticMonotoneFunction.random(8, 12)
        alphas = [0.1 * k for k in range(1, 10)]
        results = alpha_sweep(8, equal_costs(8), f, 0.3, alphas)
        costs = [out.best.cost for _, out in results]
        assert all(a <= b + 1e-12 for a, b in zip(costs, costs[1:]))

    def test_csv_shape(self):
        f = SyntheticMonotoneFunction.random(5, 9)
        names = ["a", "b", "c", "d", "e"]
        alphas = [0.25, 0.5, 0.75]
        results = alpha_sweep(5, equal_costs(5), f, 0.3, alphas)
        text = alpha_sweep_csv(results, names)
        lines = text.strip().split("\n")
        assert lines[0] == "alpha,accuracy,cost,score,num_channels,channels"
        assert len(lines) == 1 + len(alphas)
        for alpha, line in zip(alphas, lines[1:]):
            fields = line.split(",")
            assert float(fields[0]) == alpha
            assert int(fields[4]) == len(fields[5].split(";"))
            assert set(fields[5].split(";")) <= set(names)
