"""Trajectory optimization over fixed sequences, checked against dense grids."""

import math

import numpy as np
import pytest

from mtvrp import convex, instance as im, oracle, twgraph
from mtvrp.geometry import LinearArc

INF = math.inf


def build(targets, n_agents=2, capacity=4.0, n_seg=4):
    inst = im.Instance(n_agents=n_agents, v_max=1.0, capacity=capacity,
                       depot=(0.0, 0.0), targets=tuple(targets))
    return twgraph.build(inst, n_seg)


class TestSimpleTours:
    def test_out_and_back_static(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0, 0),))])
        res = convex.tour_cost((0, 1, 0), g)
        assert res.cost == pytest.approx(10.0, abs=1e-6)
        assert res.times[0] == 0.0
        assert 5.0 - 1e-9 <= res.times[1] <= 30.0 + 1e-9

    def test_unreachable_window_is_infinite(self):
        g = build([im.Target(1, 1.0, (LinearArc(0, 2, 50, 0, 0, 0),))])
        assert convex.tour_cost((0, 1, 0), g).cost == INF

    def test_single_node_sequence_free(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0, 0),))])
        assert convex.tour_cost((0,), g).cost == 0.0

    def test_cache_returns_same_object(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0, 0),))])
        a = convex.tour_cost((0, 1, 0), g)
        b = convex.tour_cost((0, 1, 0), g)
        assert a is b

    def test_moving_target_cheaper_than_window_start(self):
        # Target drifts toward the depot; waiting shortens the round trip.
        g = build([im.Target(1, 1.0, (LinearArc(10, 30, 10, 0, -0.4, 0),))])
        res = convex.tour_cost((0, 1, 0), g)
        start_cost = 2 * 10.0
        assert res.cost < start_cost - 1.0


class TestChainTimes:
    def test_min_execution_times_match_efat(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0.2, 0),)),
                   im.Target(2, 1.0, (LinearArc(10, 40, 0, 8, 0, -0.1),))])
        times = convex.min_execution_times((0, 1, 2, 0), g)
        assert times is not None
        assert times == sorted(times)
        res = convex.tour_cost((0, 1, 2, 0), g)
        # Optimal times never precede the earliest-arrival chain.
        for t_opt, t_efat in zip(res.times, times):
            assert t_opt >= t_efat - 1e-7

    def test_infeasible_chain_returns_none(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 6, 5, 0, 0, 0),)),
                   im.Target(2, 1.0, (LinearArc(5, 6, -5, 0, 0, 0),))])
        assert convex.min_execution_times((0, 1, 2), g) is None
        assert convex.tour_cost((0, 1, 2, 0), g).cost == INF


class TestGridBrackets:
    """The exact cost must sit inside the oracle's grid envelope."""

    def _random_graph(self, seed, n_tar):
        rng = np.random.default_rng(seed)
        targets = []
        for tid in range(1, n_tar + 1):
            t0 = rng.uniform(3, 40)
            t1 = t0 + rng.uniform(4, 15)
            px, py = rng.uniform(-10, 10, 2)
            sp = rng.uniform(0, 0.4)
            ang = rng.uniform(0, 2 * math.pi)
            targets.append(im.Target(tid, 1.0, (
                LinearArc(t0, t1, px, py,
                          sp * math.cos(ang), sp * math.sin(ang)),)))
        return build(targets, capacity=float(n_tar))

    @pytest.mark.parametrize("seed", range(12))
    def test_cost_within_grid_envelope(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n_tar = int(rng.integers(2, 4))
        g = self._random_graph(seed, n_tar)
        order = [0] + [1 + i for i in rng.permutation(n_tar)] + [0]
        seq = tuple(int(v) for v in order)
        exact = convex.tour_cost(seq, g)
        grid = oracle.grid_tour_cost(seq, g, resolution=300)
        if exact.cost == INF:
            assert grid.value == INF
            return
        assert grid.lower - 1e-7 <= exact.cost <= grid.value + 1e-7
        assert grid.value - grid.lower <= grid.gap_bound + 1e-7

    def test_solution_is_feasible_trajectory(self):
        g = self._random_graph(91, 3)
        seq = (0, 1, 2, 3, 0)
        res = convex.tour_cost(seq, g)
        assert res.cost < INF
        vmax = g.instance.v_max
        for k in range(len(seq) - 1):
            d = math.dist(res.positions[k], res.positions[k + 1])
            dt = res.times[k + 1] - res.times[k]
            assert dt >= -1e-9
            assert d <= vmax * dt + 1e-6
        for node, t, p in zip(seq, res.times, res.positions):
            arc = g.nodes[node].arc
            assert arc.start_time - 1e-7 <= t <= arc.end_time + 1e-7
            assert math.dist(arc.position(t), p) <= 1e-6


class TestSegmentDistance:
    def test_rejects_same_target(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0, 0),))],
                  n_seg=4)
        segs = list(g.nodes[1].segments)
        with pytest.raises(ValueError):
            convex.segment_distance(g, segs[0], segs[1])

    def test_matches_table(self):
        g = build([im.Target(1, 1.0, (LinearArc(5, 30, 5, 0, 0.1, 0),)),
                   im.Target(2, 1.0, (LinearArc(8, 35, 0, 6, 0, 0.1),))])
        for a in g.nodes[1].segments:
            for b in g.nodes[2].segments:
                got = convex.segment_distance(g, a, b)
                want = g.c_seg[a, b]
                if math.isinf(want):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want, abs=1e-7)


def test_reduced_cost_arithmetic():
    duals = [-1.0, 3.0, 4.0, 2.5]
    assert convex.reduced_cost(10.0, [1, 2], duals) == pytest.approx(4.0)
    assert convex.reduced_cost(0.0, [], duals) == pytest.approx(1.0)
