"""Brute-force reference solvers used only by tests and acceptance checks.

Nothing here is on the shipped solve path.  ``exhaustive_optimum`` enumerates
every feasible assignment of targets to at most ``n_agents`` ordered tours
(all window choices included) and costs each tour with the exact convex
solver.  The grid functions evaluate the same quantities on dense time grids
with provable error bounds, giving an independent check of the closed-form
geometry and the convex solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from mtvrp import convex, kernels
from mtvrp.geometry import LinearArc
from mtvrp.instance import Instance
from mtvrp.twgraph import TwGraph, build

INF = math.inf

MAX_ORACLE_TARGETS = 7


class OracleSizeError(ValueError):
    """Raised when an instance is too large for exhaustive enumeration."""


@dataclass
class OracleResult:
    cost: float                        # +inf when infeasible
    tours: List[Tuple[int, ...]]       # target-window node sequences


def _chain_feasible(seq: Sequence[int], graph: TwGraph) -> bool:
    return convex.min_execution_times(seq, graph) is not None


def _enumerate_tour_costs(graph: TwGraph) -> Dict[int, Tuple[float, Tuple[int, ...]]]:
    """Cheapest feasible tour per exact set of visited targets (bitmask)."""
    inst = graph.instance
    cap = inst.capacity
    best: Dict[int, Tuple[float, Tuple[int, ...]]] = {}

    def visit(seq: List[int], mask: int, load: float) -> None:
        if len(seq) > 1:
            full = tuple(seq) + (0,)
            if _chain_feasible(full, graph):
                c = convex.tour_cost(full, graph).cost
                if c < best.get(mask, (INF,))[0]:
                    best[mask] = (c, full)
        last = seq[-1]
        for v in range(1, graph.n_nodes):
            tid = graph.nodes[v].target_id
            if (mask >> (tid - 1)) & 1:
                continue
            d = graph.demand_of(v)
            if load + d > cap:
                continue
            if graph.lfdt[last, v] == -INF:
                continue
            seq.append(v)
            if _chain_feasible(tuple(seq), graph):
                visit(seq, mask | (1 << (tid - 1)), load + d)
            seq.pop()

    visit([0], 0, 0.0)
    return best


def exhaustive_optimum(instance: Instance, *, n_seg_tar: int = 4,
                       graph: Optional[TwGraph] = None) -> OracleResult:
    """Exact optimum by enumerating all tour sets of at most n_agents tours.

    Coverage is modeled as a partition of the targets: dropping a target from
    a tour keeps the tour feasible and never raises its cost, so the cheapest
    cover is attained by a partition.
    """
    if instance.n_targets > MAX_ORACLE_TARGETS:
        raise OracleSizeError(
            f"exhaustive enumeration limited to {MAX_ORACLE_TARGETS} targets, "
            f"got {instance.n_targets}")
    if graph is None:
        graph = build(instance, n_seg_tar)
    best = _enumerate_tour_costs(graph)
    n = instance.n_targets
    full = (1 << n) - 1
    # dp[mask] = (cost, list of chosen tour masks) using any number of tours;
    # bounded by n_agents via layered iteration.
    prev = {0: (0.0, [])}
    final = (INF, None)
    for _ in range(instance.n_agents):
        cur: Dict[int, Tuple[float, list]] = dict(prev)
        for mask, (c, picks) in prev.items():
            if c == INF:
                continue
            rest = full & ~mask
            sub = rest
            while sub:
                entry = best.get(sub)
                if entry is not None:
                    nc = c + entry[0]
                    if nc < cur.get(mask | sub, (INF,))[0]:
                        cur[mask | sub] = (nc, picks + [sub])
                sub = (sub - 1) & rest
        prev = cur
        if full in prev and prev[full][0] < final[0]:
            final = prev[full]
    if final[1] is None:
        return OracleResult(INF, [])
    return OracleResult(final[0], [best[m][1] for m in final[1]])


def feasible_exists(graph: TwGraph,
                    banned: Set[Tuple[int, int]] = frozenset()) -> bool:
    """Exhaustively decide whether some ban-respecting tour set covers all.

    Independent of the feasibility generator: plain recursive enumeration of
    window sequences with earliest-arrival chaining, no dominance pruning.
    """
    inst = graph.instance
    if inst.n_targets > MAX_ORACLE_TARGETS:
        raise OracleSizeError("exhaustive feasibility limited to "
                              f"{MAX_ORACLE_TARGETS} targets")
    vmax = inst.v_max
    cap = inst.capacity
    full = (1 << inst.n_targets) - 1

    def closeable(node: int, t: float) -> bool:
        if node == 0:
            return True
        if (node, 0) in banned:
            return False
        return t <= graph.lfdt[node, 0]

    def extend(node: int, t: float, load: float, mask: int,
               agents_left: int) -> bool:
        if mask == full:
            return closeable(node, t)
        arc = graph.nodes[node].arc
        x, y = arc.position(t)
        for v in range(1, graph.n_nodes):
            tid = graph.nodes[v].target_id
            if (mask >> (tid - 1)) & 1:
                continue
            if (node, v) in banned:
                continue
            d = graph.demand_of(v)
            if load + d > cap:
                continue
            t2 = kernels.efat(x, y, t, *graph.nodes[v].arc.flat, vmax)
            if t2 == INF:
                continue
            if extend(v, t2, load + d, mask | (1 << (tid - 1)), agents_left):
                return True
        if agents_left > 0 and closeable(node, t):
            return extend(0, 0.0, 0.0, mask, agents_left - 1)
        return False

    return extend(0, 0.0, 0.0, 0, inst.n_agents - 1)


# -- dense-grid evaluators -------------------------------------------------

@dataclass
class GridCost:
    value: float       # strict grid optimum (upper envelope of the true cost)
    lower: float       # certified lower envelope
    gap_bound: float   # a-priori width, linear in the grid spacing


def grid_tour_cost(seq: Sequence[int], graph: TwGraph,
                   resolution: int = 200) -> GridCost:
    """Layered shortest path over time-discretized windows.

    Grid-time paths are genuinely feasible, so the strict optimum upper
    bounds the continuous one.  Re-running with the speed cones slackened by
    two grid steps admits the rounded continuous optimum, whose cost exceeds
    the true one by at most v_max * h per leg; subtracting that excess gives
    the lower envelope.
    """
    inst = graph.instance
    vmax = inst.v_max
    arcs = [graph.nodes[v].arc for v in seq]
    L = len(arcs)
    grids = []
    h = 0.0
    for arc in arcs:
        span = arc.end_time - arc.start_time
        ts = np.linspace(arc.start_time, arc.end_time, resolution)
        grids.append(ts)
        if span > 0:
            h = max(h, span / (resolution - 1))

    def layered(slack: float) -> float:
        ts0 = grids[0][:1]  # depart the first window at its start
        pos = np.array([arcs[0].position(ts0[0])])
        costs = np.zeros(1)
        cur_t = ts0
        for k in range(1, L):
            ts = grids[k]
            p = np.array([arcs[k].position(t) for t in ts])
            dt = ts[None, :] - cur_t[:, None]
            dx = p[None, :, 0] - pos[:, None, 0]
            dy = p[None, :, 1] - pos[:, None, 1]
            dist = np.hypot(dx, dy)
            ok = (dt >= -1e-12) & (dist <= vmax * dt + slack + 1e-12)
            total = np.where(ok, costs[:, None] + dist, INF)
            costs = total.min(axis=0)
            cur_t, pos = ts, p
            if not np.isfinite(costs).any():
                return INF
        return float(costs.min())

    strict = layered(0.0)
    slacked = layered(2.0 * vmax * h)
    lower = slacked - (L - 1) * vmax * h if slacked < INF else INF
    return GridCost(strict, lower, 2.0 * (L - 1) * vmax * h)


def grid_efat(ox: float, oy: float, ot: float, arc: LinearArc, vmax: float,
              resolution: int = 2000) -> float:
    """Earliest grid interception time; exceeds the true value by < one step."""
    ts = np.linspace(arc.start_time, arc.end_time, resolution)
    for t in ts:
        if t < ot:
            continue
        px, py = arc.position(t)
        if math.hypot(px - ox, py - oy) <= vmax * (t - ot) + 1e-12:
            return float(t)
    return INF


def grid_lfdt(from_arc: LinearArc, to_arc: LinearArc, vmax: float,
              resolution: int = 2000) -> float:
    """Latest grid departure still reaching the destination window."""
    ts = np.linspace(from_arc.start_time, from_arc.end_time, resolution)
    best = -INF
    for t in ts:
        x, y = from_arc.position(t)
        if kernels.efat(x, y, t, *to_arc.flat, vmax) < INF:
            best = float(t)
    return best
