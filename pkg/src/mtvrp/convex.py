"""Exact trajectory optimization over a fixed target-window sequence.

``tour_cost`` minimizes the distance traveled by a speed-limited agent that
intercepts each window of a partial tour once, with the interception position
affine in the interception time.  The problem is convex (sum of norms of
affine maps, second-order-cone speed constraints, box time windows); it is
solved with SLSQP from an earliest-arrival feasible start, with a
trust-region fallback.  Infeasibility is certified exactly by the
earliest-feasible-arrival chain before any iterative solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import NonlinearConstraint, minimize

from mtvrp import kernels
from mtvrp.twgraph import TwGraph

INF = math.inf

SOLVER_TOL = 1e-7
_SMOOTH_EPS2 = 1e-24


class ConvexSolverError(RuntimeError):
    """Raised when neither solver converges on a feasible sequence."""


@dataclass
class TrajOptResult:
    cost: float
    times: List[float]
    positions: List[Tuple[float, float]]


_INFEASIBLE = TrajOptResult(INF, [], [])


def min_execution_times(seq: Sequence[int], graph: TwGraph) -> Optional[List[float]]:
    """Earliest-arrival chain along the sequence, or None when infeasible.

    Greedy earliest interception is optimal in time: an agent may always ride
    a target forward, so arriving earlier never hurts.
    """
    inst = graph.instance
    nodes = graph.nodes
    first = nodes[seq[0]]
    t = first.arc.start_time
    x, y = first.arc.position(t)
    times = [t]
    for node in seq[1:]:
        arc = nodes[node].arc
        t = kernels.efat(x, y, t, *arc.flat, inst.v_max)
        if t == INF:
            return None
        x, y = arc.position(t)
        times.append(t)
    return times


def tour_cost(seq: Sequence[int], graph: TwGraph,
              tol: float = SOLVER_TOL) -> TrajOptResult:
    """Minimum travel distance executing the sequence, with times/positions.

    Results are cached on the graph (shared by the solver and the test
    oracles); infeasible sequences get cost +inf.
    """
    key = tuple(seq)
    cached = graph.tour_cost_cache.get(key)
    if cached is not None:
        return cached
    result = _solve_tour(key, graph, tol)
    graph.tour_cost_cache[key] = result
    return result


def _solve_tour(seq: Tuple[int, ...], graph: TwGraph,
                tol: float) -> TrajOptResult:
    inst = graph.instance
    nodes = graph.nodes
    L = len(seq)
    if L == 1:
        tw = nodes[seq[0]]
        t = tw.arc.start_time
        return TrajOptResult(0.0, [t], [tw.arc.position(t)])
    efat_times = min_execution_times(seq, graph)
    if efat_times is None:
        return _INFEASIBLE

    arcs = [nodes[n].arc for n in seq]
    if L == 2:
        t0 = efat_times[0]
        t1 = efat_times[1]
        # Single leg: earliest arrival is also distance-minimal only for
        # static destinations; minimize distance over the reachable range.
        p0 = arcs[0].position(t0)
        lo, hi = kernels.reach_interval(p0[0], p0[1], t0, *arcs[1].flat,
                                        inst.v_max)
        t1, d = _min_dist_on_arc(p0, arcs[1], lo, hi)
        return TrajOptResult(d, [t0, t1], [p0, arcs[1].position(t1)])

    # General case: optimize interception times t_2..t_L.
    vmax = inst.v_max
    anchor_t = efat_times[0]
    anchor_p = arcs[0].position(anchor_t)
    free = list(range(1, L))
    lbs = np.array([arcs[k].start_time for k in free])
    ubs = np.array([arcs[k].end_time for k in free])
    x0 = np.minimum(np.maximum(np.array(efat_times[1:]), lbs), ubs)

    P = np.empty((L, 2))
    V = np.empty((L, 2))
    T0 = np.empty(L)
    for k, arc in enumerate(arcs):
        P[k] = (arc.px, arc.py)
        V[k] = (arc.vx, arc.vy)
        T0[k] = arc.start_time

    def positions(x: np.ndarray) -> np.ndarray:
        ts = np.concatenate(([anchor_t], x))
        pos = P + V * (ts - T0)[:, None]
        pos[0] = anchor_p
        return pos

    def legs(x: np.ndarray):
        pos = positions(x)
        d = np.diff(pos, axis=0)
        dist = np.sqrt(np.sum(d * d, axis=1) + _SMOOTH_EPS2)
        return pos, d, dist

    def objective(x: np.ndarray) -> float:
        return float(legs(x)[2].sum())

    def gradient(x: np.ndarray) -> np.ndarray:
        pos, d, dist = legs(x)
        unit = d / dist[:, None]
        grad = np.zeros(L - 1)
        for i in range(L - 1):
            # Leg i connects node i to node i+1; d/dt_{i+1} of dist_i.
            grad[i] += float(unit[i] @ V[i + 1])
            if i + 2 < L:
                grad[i] -= float(unit[i + 1] @ V[i + 1])
        return grad

    def speed_margin(x: np.ndarray) -> np.ndarray:
        _, _, dist = legs(x)
        ts = np.concatenate(([anchor_t], x))
        return vmax * np.diff(ts) - dist

    def speed_jac(x: np.ndarray) -> np.ndarray:
        _, d, dist = legs(x)
        unit = d / dist[:, None]
        jac = np.zeros((L - 1, L - 1))
        for i in range(L - 1):
            jac[i, i] = vmax - float(unit[i] @ V[i + 1])
            if i > 0:
                jac[i, i - 1] = -vmax + float(unit[i] @ V[i])
        return jac

    cons = NonlinearConstraint(speed_margin, 0.0, np.inf, jac=speed_jac)
    scale = 1.0 + abs(objective(x0))
    res = minimize(objective, x0, jac=gradient, bounds=list(zip(lbs, ubs)),
                   constraints=[cons], method="SLSQP",
                   options={"maxiter": 300, "ftol": 1e-12})
    x = np.minimum(np.maximum(res.x, lbs), ubs)
    if (not res.success) or np.min(speed_margin(x)) < -1e-9 * scale:
        res2 = minimize(objective, x0, jac=gradient,
                        bounds=list(zip(lbs, ubs)), constraints=[cons],
                        method="trust-constr",
                        options={"maxiter": 2000, "gtol": 1e-12,
                                 "xtol": 1e-14})
        x2 = np.minimum(np.maximum(res2.x, lbs), ubs)
        if np.min(speed_margin(x2)) >= -1e-9 * scale and (
                res2.success or objective(x2) <= objective(x)):
            x = x2
        elif np.min(speed_margin(x)) < -1e-9 * scale:
            raise ConvexSolverError(
                f"trajectory optimization failed to converge on {seq}")
    pos = positions(x)
    d = np.diff(pos, axis=0)
    cost = float(np.sqrt(np.sum(d * d, axis=1)).sum())
    times = [anchor_t] + [float(v) for v in x]
    return TrajOptResult(cost, times, [tuple(map(float, p)) for p in pos])


def _min_dist_on_arc(origin, arc, lo, hi):
    """Min distance from a fixed point to arc positions over [lo, hi]."""
    a = arc.position(lo)
    b = arc.position(hi)
    dx, dy = b[0] - a[0], b[1] - a[1]
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        return lo, math.hypot(a[0] - origin[0], a[1] - origin[1])
    u = ((origin[0] - a[0]) * dx + (origin[1] - a[1]) * dy) / l2
    u = min(1.0, max(0.0, u))
    t = lo + u * (hi - lo)
    px, py = arc.position(t)
    return t, math.hypot(px - origin[0], py - origin[1])


def segment_distance(graph: TwGraph, seg_a: int, seg_b: int,
                     tol: float = 1e-10) -> float:
    """Relaxed inter-segment travel distance (the c_seg primitive)."""
    ua = graph.nodes[graph.seg_owner[seg_a]]
    ub = graph.nodes[graph.seg_owner[seg_b]]
    if ua.target_id == ub.target_id:
        raise ValueError("segments must belong to different targets")
    return kernels.segment_distance(
        graph.seg_t0[seg_a], graph.seg_t1[seg_a],
        graph.seg_sx[seg_a], graph.seg_sy[seg_a], ua.arc.vx, ua.arc.vy,
        graph.seg_t0[seg_b], graph.seg_t1[seg_b],
        graph.seg_sx[seg_b], graph.seg_sy[seg_b], ub.arc.vx, ub.arc.vy,
        graph.instance.v_max, tol)


def reduced_cost(cost: float, visited_targets, duals: Sequence[float]) -> float:
    """c*(tour) minus the coverage duals of visited targets and the fleet dual.

    ``duals[0]`` is the fleet dual (non-positive), ``duals[i]`` the coverage
    dual of target i.
    """
    return cost - sum(duals[i] for i in visited_targets) - duals[0]
