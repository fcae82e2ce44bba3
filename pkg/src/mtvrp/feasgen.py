"""Depth-first construction of one feasible multi-tour solution.

The search state bundles the partial tours of all agents started so far into
a single record (window, time, load, visited bitmask, agent count) with a
backpointer chain; splitting the chain at depot visits recovers one tour per
agent.  The search is complete: it returns a feasible set of tours respecting
the edge bans whenever one exists, and an empty result otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from mtvrp import kernels
from mtvrp.twgraph import TwGraph

INF = math.inf


class MLabel:
    __slots__ = ("tw", "t", "sigma", "bmask", "n", "parent", "alive")

    def __init__(self, tw, t, sigma, bmask, n, parent):
        self.tw = tw
        self.t = t
        self.sigma = sigma
        self.bmask = bmask
        self.n = n
        self.parent = parent
        self.alive = True


def _reconstruct(leaf: MLabel) -> List[Tuple[int, ...]]:
    chain = []
    node: Optional[MLabel] = leaf
    while node is not None:
        chain.append(node.tw)
        node = node.parent
    chain.reverse()
    tours: List[List[int]] = []
    for tw in chain:
        if tw == 0:
            tours.append([0])
        else:
            tours[-1].append(tw)
    out = []
    for tour in tours:
        if len(tour) == 1:
            continue  # an agent that never left the depot
        tour.append(0)
        out.append(tuple(tour))
    return out


def generate_feasible(graph: TwGraph,
                      banned: Set[Tuple[int, int]] = frozenset(),
                      max_expansions: int = 20_000_000) -> List[Tuple[int, ...]]:
    """One set of tours covering every target, or [] when none exists."""
    inst = graph.instance
    if graph.unreachable_targets:
        return []
    vmax = inst.v_max
    cap = inst.capacity
    n_agt = inst.n_agents
    n_tar = inst.n_targets
    full = (1 << n_tar) - 1
    tids = [tw.target_id for tw in graph.nodes]
    demands = [graph.demand_of(v) for v in range(graph.n_nodes)]

    root = MLabel(0, 0.0, 0.0, 0, 1, None)
    stack = [root]
    store: Dict[Tuple[int, int, int], List[MLabel]] = {}
    expansions = 0
    while stack:
        u = stack.pop()
        if not u.alive:
            continue
        expansions += 1
        if expansions > max_expansions:
            raise RuntimeError("feasible-solution search budget exhausted")
        closeable = u.tw == 0 or (
            u.t <= graph.lfdt[u.tw, 0]
            and (not banned or (u.tw, 0) not in banned))
        if u.bmask == full:
            if closeable:
                return _reconstruct(u)
            continue
        arc_u = graph.nodes[u.tw].arc
        ux, uy = arc_u.position(u.t)
        lfdt_row = graph.lfdt[u.tw]
        # Pushed first, explored last: starting a fresh agent is the fallback.
        if u.n < n_agt and closeable:
            _push(MLabel(0, 0.0, 0.0, u.bmask, u.n + 1, u), stack, store)
        succ = []
        for v in range(1, graph.n_nodes):
            tid = tids[v]
            if tid == tids[u.tw]:
                continue
            if banned and (u.tw, v) in banned:
                continue
            if u.t > lfdt_row[v]:
                continue
            sig2 = u.sigma + demands[v]
            if sig2 > cap:
                continue
            if (u.bmask >> (tid - 1)) & 1:
                continue
            t2 = kernels.efat(ux, uy, u.t, *graph.nodes[v].arc.flat, vmax)
            if t2 == INF:
                continue
            if u.n == n_agt:
                # Last agent: do not strand any unvisited target.
                mrow = graph.max_lfdt[v]
                stranded = False
                for i2 in range(1, n_tar + 1):
                    if i2 == tid or (u.bmask >> (i2 - 1)) & 1:
                        continue
                    if t2 > mrow[i2]:
                        stranded = True
                        break
                if stranded:
                    continue
            succ.append(MLabel(v, t2, sig2, u.bmask | (1 << (tid - 1)),
                               u.n, u))
        # Later pushes pop first; explore the earliest interception first.
        succ.sort(key=lambda m: -m.t)
        for m in succ:
            _push(m, stack, store)
    return []


def _push(m: MLabel, stack: List[MLabel],
          store: Dict[Tuple[int, int, int], List[MLabel]]) -> None:
    key = (m.tw, m.bmask, m.n)
    kept = store.setdefault(key, [])
    for other in kept:
        if other.t <= m.t and other.sigma <= m.sigma:
            return
    survivors = []
    for other in kept:
        if m.t <= other.t and m.sigma <= other.sigma:
            other.alive = False
        else:
            survivors.append(other)
    survivors.append(m)
    store[key] = survivors
    stack.append(m)
