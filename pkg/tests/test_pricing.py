"""Label-setting pricing: dominance rules, search results vs enumeration."""

import itertools
import math

import numpy as np
import pytest

from mtvrp import convex, instance as im, pricing, twgraph
from mtvrp.geometry import LinearArc
from mtvrp.pricing import Label, dominates

INF = math.inf


def make_label(tw=1, t=0.0, sigma=0.0, bmask=0, gub=(0.0,), glb=(0.0,),
               lam=0.0):
    return Label(tw, t, sigma, bmask, np.array(gub, dtype=float),
                 np.array(glb, dtype=float), lam, None, 0)


class TestDominance:
    def test_higher_load_never_dominates(self):
        l = make_label(sigma=2.0, gub=(0.0,), glb=(0.0,))
        lp = make_label(sigma=1.0, gub=(100.0,), glb=(100.0,))
        assert not dominates(l, lp, np.zeros(1))

    def test_visited_set_must_be_subset(self):
        l = make_label(bmask=0b011, gub=(0.0,), glb=(0.0,))
        lp = make_label(bmask=0b001, gub=(0.0,), glb=(0.0,))
        # Cost-equal labels: only the one with the smaller visited set may
        # dominate.
        assert not dominates(l, lp, np.zeros(1))
        assert dominates(lp, l, np.zeros(1))

    def test_reflexive_when_bounds_tight(self):
        # Static target: no drift within segments, upper equals lower bound.
        l = make_label(gub=(5.0, 7.0), glb=(5.0, 7.0), lam=2.0)
        assert dominates(l, l, np.zeros(2))

    def test_not_reflexive_with_drift_gap(self):
        # Moving target: the start-point bound plus drift exceeds the
        # relaxed lower bound, so a label need not dominate itself.
        l = make_label(gub=(5.0,), glb=(4.0,))
        assert not dominates(l, l, np.array([2.0]))

    def test_per_segment_comparison(self):
        l = make_label(gub=(3.0, 9.0), glb=(3.0, 9.0))
        lp = make_label(gub=(4.0, 8.0), glb=(4.0, 8.0))
        # Better on segment 0, worse on segment 1: no dominance either way.
        assert not dominates(l, lp, np.zeros(2))
        assert not dominates(lp, l, np.zeros(2))

    def test_dual_shift_enters_comparison(self):
        l = make_label(gub=(6.0,), glb=(6.0,), lam=3.0)
        lp = make_label(gub=(4.0,), glb=(4.0,), lam=0.0)
        # 6 - 3 = 3 <= 4 - 0: the collected dual pays for the extra cost.
        assert dominates(l, lp, np.zeros(1))
        assert not dominates(lp, l, np.zeros(1))

    def test_infinite_lower_bound_dominated(self):
        l = make_label(gub=(5.0,), glb=(5.0,))
        lp = make_label(gub=(INF,), glb=(INF,))
        assert dominates(l, lp, np.zeros(1))


def build_graph(seed, n_tar=3, n_agt=2, n_seg=4, windows=2):
    inst = im.generate(seed=seed, n_tar=n_tar, n_agt=n_agt,
                       windows_per_target=windows)
    return twgraph.build(inst, n_seg)


def enumerate_min_red(graph, duals, banned=frozenset()):
    """Minimum reduced cost over all feasible single-agent tours."""
    inst = graph.instance
    nodes = [v for v in range(1, graph.n_nodes)]
    best = INF
    best_seq = None
    max_len = int(inst.capacity)
    for r in range(1, max_len + 1):
        for perm in itertools.permutations(nodes, r):
            tids = [graph.target_of(v) for v in perm]
            if len(set(tids)) != len(tids):
                continue
            seq = (0,) + perm + (0,)
            if banned and any(e in banned for e in zip(seq, seq[1:])):
                continue
            cost = convex.tour_cost(seq, graph).cost
            if cost == INF:
                continue
            red = cost - sum(duals[t] for t in tids) - duals[0]
            if red < best:
                best, best_seq = red, seq
    return best, best_seq


class TestSolvePricing:
    def test_zero_duals_no_columns(self):
        g = build_graph(5)
        res = pricing.solve_pricing(g, np.zeros(g.instance.n_targets + 1))
        assert res.tours == []

    def test_large_dual_forces_coverage(self):
        g = build_graph(5)
        duals = np.zeros(g.instance.n_targets + 1)
        duals[1] = 1000.0
        res = pricing.solve_pricing(g, duals)
        assert res.tours
        best = min(res.tours, key=lambda t: t[2])
        assert 1 in {g.target_of(v) for v in best[0]}

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_enumeration(self, seed):
        g = build_graph(seed)
        rng = np.random.default_rng(100 + seed)
        duals = np.concatenate(([-rng.uniform(0, 2)],
                                rng.uniform(5, 25, g.instance.n_targets)))
        want, _ = enumerate_min_red(g, duals)
        res = pricing.solve_pricing(g, duals)
        if want >= -pricing.EPS_PRICING:
            assert all(r >= -pricing.EPS_PRICING for _, _, r in res.tours)
        else:
            assert res.tours
            got = min(r for _, _, r in res.tours)
            assert got == pytest.approx(want, abs=1e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_dominance_disabled_same_minimum(self, seed):
        g = build_graph(40 + seed)
        rng = np.random.default_rng(200 + seed)
        duals = np.concatenate(([0.0],
                                rng.uniform(5, 25, g.instance.n_targets)))
        a = pricing.solve_pricing(g, duals)
        b = pricing.solve_pricing(g, duals, dominance_disabled=True)
        ra = min((r for _, _, r in a.tours), default=INF)
        rb = min((r for _, _, r in b.tours), default=INF)
        if ra is INF or rb is INF:
            assert ra == rb
        else:
            assert ra == pytest.approx(rb, abs=1e-6)
        # Disabling dominance can only explore more labels.
        assert b.n_created >= a.n_created

    def test_banned_edges_respected(self):
        g = build_graph(5)
        duals = np.concatenate(([0.0], np.full(g.instance.n_targets, 30.0)))
        res = pricing.solve_pricing(g, duals)
        assert res.tours
        seq = min(res.tours, key=lambda t: t[2])[0]
        banned = frozenset(zip(seq, seq[1:]))
        res2 = pricing.solve_pricing(g, duals, banned=banned)
        for s, _, _ in res2.tours:
            assert not any(e in banned for e in zip(s, s[1:]))
        want, _ = enumerate_min_red(g, duals, banned)
        got = min((r for _, _, r in res2.tours), default=INF)
        if want < -pricing.EPS_PRICING:
            assert got == pytest.approx(want, abs=1e-6)

    def test_capacity_limits_tour_length(self):
        g = build_graph(7, n_tar=4)
        assert g.instance.capacity == 2.0
        duals = np.concatenate(([0.0], np.full(4, 50.0)))
        res = pricing.solve_pricing(g, duals)
        for seq, _, _ in res.tours:
            assert len(seq) - 2 <= 2

    def test_deterministic(self):
        g1 = build_graph(9)
        g2 = build_graph(9)
        duals = np.concatenate(([-0.5], np.full(3, 20.0)))
        a = pricing.solve_pricing(g1, duals)
        b = pricing.solve_pricing(g2, duals)
        assert a.tours == b.tours
        assert a.n_popped == b.n_popped
        assert a.n_created == b.n_created

    def test_label_cap_raises(self):
        g = build_graph(5)
        duals = np.concatenate(([0.0], np.full(3, 30.0)))
        with pytest.raises(pricing.LabelLimitError):
            pricing.solve_pricing(g, duals, label_cap=10)

    def test_deadline_raises(self):
        # Deadlines are polled every 256 pops; use a search big enough.
        g = build_graph(5, n_tar=7, n_agt=1)
        duals = np.concatenate(([0.0], np.full(7, 60.0)))
        with pytest.raises(pricing.TimeLimitError):
            pricing.solve_pricing(g, duals, deadline=0.0,
                                  dominance_disabled=True)

    def test_trace_events(self):
        g = build_graph(5)
        duals = np.concatenate(([0.0], np.full(3, 30.0)))
        events = []
        pricing.solve_pricing(g, duals, trace=events.append)
        kinds = {e["event"] for e in events}
        assert "pricing_done" in kinds
        assert any(e["event"] == "tour" for e in events)


class TestHeuristicMode:
    @pytest.mark.parametrize("seed", range(4))
    def test_heuristic_tours_are_valid_columns(self, seed):
        g = build_graph(60 + seed)
        rng = np.random.default_rng(seed)
        duals = np.concatenate(([0.0],
                                rng.uniform(10, 30, g.instance.n_targets)))
        res = pricing.solve_pricing(g, duals, heuristic=True)
        for seq, cost, red in res.tours:
            exact = convex.tour_cost(seq, g).cost
            assert cost == pytest.approx(exact, abs=1e-9)
            tids = [g.target_of(v) for v in seq[1:-1]]
            want = exact - sum(duals[t] for t in tids) - duals[0]
            assert red == pytest.approx(want, abs=1e-9)
            assert red < -pricing.EPS_PRICING

    def test_heuristic_explores_fewer_labels(self):
        g = build_graph(12, n_tar=4)
        duals = np.concatenate(([0.0], np.full(4, 30.0)))
        h = pricing.solve_pricing(g, duals, heuristic=True)
        f = pricing.solve_pricing(g, duals, heuristic=False)
        assert h.n_created <= f.n_created

    def test_fallback_recovers_exact_minimum(self):
        # Whatever the heuristic pass returns, the fallback wrapper's result
        # must certify the true minimum when the heuristic finds nothing.
        for seed in range(8):
            g = build_graph(80 + seed)
            rng = np.random.default_rng(seed)
            duals = np.concatenate(
                ([0.0], rng.uniform(0, 14, g.instance.n_targets)))
            res = pricing.run_with_fallback(g, duals)
            want, _ = enumerate_min_red(g, duals)
            got = min((r for _, _, r in res.tours), default=INF)
            if want >= -pricing.EPS_PRICING:
                assert got == INF or got >= -pricing.EPS_PRICING
            elif res.used_fallback:
                assert got == pytest.approx(want, abs=1e-6)
            else:
                # Heuristic pass: any improving column is acceptable.
                assert got < -pricing.EPS_PRICING


class TestStoredLabelInvariant:
    def test_no_stored_pair_dominates(self):
        # Re-run the search with a capture of surviving labels per node by
        # instrumenting through the trace; instead, rebuild the invariant
        # directly from the public result: every returned depot label is
        # strictly better than every other in exact reduced cost or distinct.
        g = build_graph(5)
        duals = np.concatenate(([0.0], np.full(3, 25.0)))
        res = pricing.solve_pricing(g, duals)
        reds = [r for _, _, r in res.tours]
        assert len(set(np.round(reds, 12))) == len(reds)
