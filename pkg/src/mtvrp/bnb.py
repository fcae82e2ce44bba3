"""Branch-and-price driver: depth-first tree over banned-edge sets.

Each tree node solves its LP relaxation by column generation (restricted
master + pricing), updates the incumbent on integral solutions, and branches
on a fractional edge flow by banning the edge in one child and mandating it
in the other.  The column pool is global; tours using banned edges are
filtered out per node when the LP is built.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from mtvrp import convex, feasgen, master, pricing, twgraph
from mtvrp.instance import Instance, Solution, SolutionTour, TourStop
from mtvrp.master import ColumnPool, Tour
from mtvrp.pricing import LabelLimitError, TimeLimitError

INF = math.inf

PRUNE_TOL = 1e-9
FLOW_TOL = 1e-6

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_LIMIT = "limit-hit"


@dataclass
class Limits:
    time_limit: Optional[float] = None          # seconds, wall clock
    label_cap: int = pricing.DEFAULT_LABEL_CAP
    node_cap: Optional[int] = None


@dataclass
class BBNode:
    banned: FrozenSet[Tuple[int, int]]
    lower_bound: float
    depth: int


@dataclass
class SolveResult:
    status: str
    solution: Optional[Solution]
    stats: Dict[str, object]


def _make_tour(seq: Tuple[int, ...], graph: twgraph.TwGraph) -> Tour:
    cost = convex.tour_cost(seq, graph).cost
    visited = frozenset(graph.nodes[v].target_id for v in seq
                        if graph.nodes[v].target_id != 0)
    load = sum(graph.instance.target(i).demand for i in visited)
    return Tour(tuple(seq), cost, visited, load)


def _materialize(tours: List[Tour], graph: twgraph.TwGraph) -> Solution:
    out = []
    total = 0.0
    for tour in tours:
        res = convex.tour_cost(tour.sequence, graph)
        stops = []
        for v, t, p in zip(tour.sequence, res.times, res.positions):
            tw = graph.nodes[v]
            stops.append(TourStop(target=tw.target_id, window=tw.window_idx,
                                  time=float(t),
                                  position=(float(p[0]), float(p[1]))))
        out.append(SolutionTour(sequence=tuple(stops), load=tour.load))
        total += res.cost
    return Solution(cost=total, tours=tuple(out))


def solve(instance: Instance, n_seg_tar: int = 32,
          limits: Optional[Limits] = None,
          graph: Optional[twgraph.TwGraph] = None,
          trace: Optional[Callable[[dict], None]] = None,
          dump_lp: Optional[str] = None) -> SolveResult:
    """Solve to proven optimality, or return the best incumbent at a limit."""
    limits = limits or Limits()
    t_start = time.monotonic()
    deadline = None if limits.time_limit is None else t_start + limits.time_limit
    stats: Dict[str, object] = {
        "nodes_expanded": 0, "columns": 0, "root_lp": None,
        "optimal_cost": None, "gap_percent": None,
        "wall_time_sec": 0.0, "pricing_time_sec": 0.0,
    }

    def finish(status: str, tours: Optional[List[Tour]],
               g: Optional[twgraph.TwGraph], lower: float) -> SolveResult:
        stats["wall_time_sec"] = time.monotonic() - t_start
        sol = None
        if tours is not None and g is not None:
            sol = _materialize(tours, g)
            stats["incumbent_cost"] = sol.cost
        if status == STATUS_OPTIMAL and sol is not None:
            stats["optimal_cost"] = sol.cost
            root = stats["root_lp"]
            if root is not None and root > 0:
                stats["gap_percent"] = max(0.0, (sol.cost - root) / root * 100.0)
            elif root is not None:
                stats["gap_percent"] = 0.0
        if status == STATUS_LIMIT:
            stats["lower_bound"] = None if lower == -INF else lower
        stats["status"] = status
        return SolveResult(status, sol, stats)

    if graph is None:
        graph = twgraph.build(instance, n_seg_tar)
    if graph.unreachable_targets:
        return finish(STATUS_INFEASIBLE, None, None, -INF)

    init_seqs = feasgen.generate_feasible(graph)
    if not init_seqs:
        return finish(STATUS_INFEASIBLE, None, None, -INF)
    pool = ColumnPool()
    inc_tours = [_make_tour(s, graph) for s in init_seqs]
    for t in inc_tours:
        pool.add(t)
    c_inc = sum(t.cost for t in inc_tours)

    n_tar = instance.n_targets
    n_agt = instance.n_agents
    stack: List[BBNode] = [BBNode(frozenset(), -INF, 0)]

    def over_time() -> bool:
        return deadline is not None and time.monotonic() > deadline

    def global_bound(extra: float) -> float:
        bounds = [n.lower_bound for n in stack] + [extra]
        return min(bounds) if bounds else extra

    while stack:
        if over_time() or (limits.node_cap is not None
                           and stats["nodes_expanded"] >= limits.node_cap):
            stats["columns"] = len(pool)
            return finish(STATUS_LIMIT, inc_tours, graph, global_bound(c_inc))
        node = stack.pop()
        if node.lower_bound >= c_inc - PRUNE_TOL:
            continue
        stats["nodes_expanded"] += 1
        if trace is not None:
            trace({"event": "node", "depth": node.depth,
                   "banned": len(node.banned), "incumbent": c_inc})

        # Column generation at this node.
        rmp = None
        tried_feasgen = False
        node_feasible = True
        try:
            while True:
                dump = dump_lp if node.depth == 0 else None
                rmp = master.solve_rmp(pool.tours, n_tar, n_agt,
                                       node.banned, dump_path=dump)
                if rmp.status == "infeasible":
                    if tried_feasgen:
                        node_feasible = False
                        break
                    tried_feasgen = True
                    seqs = feasgen.generate_feasible(graph, node.banned)
                    if not seqs:
                        node_feasible = False
                        break
                    for s in seqs:
                        pool.add(_make_tour(s, graph))
                    continue
                chosen = master.extract_integer(pool.tours, rmp.theta)
                if chosen is not None:
                    cand, cost = _exactly_once(chosen, graph)
                    if cost < c_inc - PRUNE_TOL:
                        inc_tours = cand
                        c_inc = cost
                t0 = time.monotonic()
                pres = pricing.run_with_fallback(
                    graph, rmp.duals, node.banned,
                    label_cap=limits.label_cap, deadline=deadline,
                    trace=trace)
                stats["pricing_time_sec"] += time.monotonic() - t0
                added = 0
                for seq, cost, _red in pres.tours:
                    if pool.add(_make_tour(seq, graph)):
                        added += 1
                if added == 0:
                    break
                if over_time():
                    stats["columns"] = len(pool)
                    return finish(STATUS_LIMIT, inc_tours, graph,
                                  global_bound(min(c_inc, rmp.objective)))
        except (LabelLimitError, TimeLimitError):
            stats["columns"] = len(pool)
            return finish(STATUS_LIMIT, inc_tours, graph, global_bound(c_inc))

        if not node_feasible:
            continue
        lp_val = rmp.objective
        if node.depth == 0 and stats["root_lp"] is None:
            stats["root_lp"] = lp_val
        if lp_val >= c_inc - PRUNE_TOL:
            continue
        chosen = master.extract_integer(pool.tours, rmp.theta)
        if chosen is not None:
            # LP-B optimum is integral; incumbent already updated above.
            continue

        edge = _branch_edge(pool.tours, rmp.theta, graph, node.banned)
        if edge is None:
            raise RuntimeError(
                "fractional LP solution with no fractional edge flow")
        u, v = edge
        ban_a = frozenset(node.banned | {edge})
        child_b = BBNode(frozenset(node.banned | _mandate_bans(edge, graph)),
                         lp_val, node.depth + 1)
        child_a = BBNode(ban_a, lp_val, node.depth + 1)
        stack.append(child_b)
        stack.append(child_a)
        if trace is not None:
            trace({"event": "branch", "edge": edge, "lp": lp_val})

    stats["columns"] = len(pool)
    return finish(STATUS_OPTIMAL, inc_tours, graph, c_inc)


def _exactly_once(chosen: List[Tour],
                  graph: twgraph.TwGraph) -> Tuple[List[Tour], float]:
    """Strip duplicate target visits from an integral tour selection.

    The coverage constraint is an inequality, so an integral LP solution may
    visit a target twice.  Skipping a stop keeps a tour feasible (the agent
    can fly the original trajectory and simply not intercept), so keeping the
    first visit of each target yields a valid solution of no greater cost.
    """
    covered: Set[int] = set()
    out = []
    total = 0.0
    for tour in chosen:
        seq = [tour.sequence[0]]
        for v in tour.sequence[1:-1]:
            tid = graph.nodes[v].target_id
            if tid in covered:
                continue
            covered.add(tid)
            seq.append(v)
        seq.append(tour.sequence[-1])
        if len(seq) <= 2:
            continue
        t = tour if len(seq) == len(tour.sequence) else \
            _make_tour(tuple(seq), graph)
        out.append(t)
        total += t.cost
    return out, total


def _mandate_bans(edge: Tuple[int, int],
                  graph: twgraph.TwGraph) -> Set[Tuple[int, int]]:
    """Edge bans that force traversal of ``edge`` in exactly-once solutions.

    Besides the usual sibling bans (other edges leaving the tail, other edges
    entering the head), also ban entry into every other window of the two
    endpoint targets: a solution that serves each target once and uses the
    edge never enters those windows, and without this the mandate child can
    equal its parent and the depth-first search would never terminate.
    """
    u, v = edge
    bans: Set[Tuple[int, int]] = set()
    for w in range(graph.n_nodes):
        if w != v and graph.has_edge(u, w):
            bans.add((u, w))
        if w != u and graph.has_edge(w, v):
            bans.add((w, v))
    for node in (u, v):
        tid = graph.nodes[node].target_id
        if tid == 0:
            continue
        for other in graph.windows_of_target(tid):
            if other == node:
                continue
            for w in range(graph.n_nodes):
                if graph.has_edge(w, other):
                    bans.add((w, other))
    return bans


def _branch_edge(tours, theta, graph,
                 banned: FrozenSet[Tuple[int, int]]) -> Optional[Tuple[int, int]]:
    """Minimum-flow fractional edge, preferring edges away from the depot.

    Candidates whose mandate child would add no new ban are skipped; they
    cannot make progress (and for a coverage-forced edge the flow is >= 1,
    so such a candidate only arises from the others).
    """
    flows = master.edge_flows(tours, theta)
    frac = [(f, e) for e, f in flows.items()
            if FLOW_TOL <= f <= 1.0 - FLOW_TOL
            and not _mandate_bans(e, graph) <= banned]
    if not frac:
        return None
    non_depot = [(f, e) for f, e in frac if e[0] != 0 and e[1] != 0]
    pick = non_depot if non_depot else frac
    pick.sort(key=lambda fe: (fe[0], fe[1]))
    return pick[0][1]
