"""Pricing subproblem: label-setting search for negative-reduced-cost tours.

Labels carry, besides the usual time/load/visited state, two per-segment cost
vectors: an upper bound restricted to segment start-point interceptions and a
lower bound that relaxes trajectory continuity between windows.  Both update
with a Bellman step over precomputed pairwise tables, which keeps extension
cheap; the exact convex solve happens only for complete tours at the depot.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from heapq import heappush, heappop
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from mtvrp import convex, kernels
from mtvrp.twgraph import TwGraph

INF = math.inf

EPS_PRICING = 1e-4
DEFAULT_LABEL_CAP = 50_000_000


class LabelLimitError(RuntimeError):
    """Raised when the label budget is exhausted."""


class TimeLimitError(RuntimeError):
    """Raised when the pricing deadline passes."""


class Label:
    __slots__ = ("tw", "t", "sigma", "bmask", "gub", "glb", "lam",
                 "parent", "seq", "red", "alive")

    def __init__(self, tw, t, sigma, bmask, gub, glb, lam, parent, seq):
        self.tw = tw
        self.t = t
        self.sigma = sigma
        self.bmask = bmask
        self.gub = gub
        self.glb = glb
        self.lam = lam
        self.parent = parent
        self.seq = seq
        self.red = None    # exact reduced cost, depot labels only
        self.alive = True

    def sequence(self) -> Tuple[int, ...]:
        out = []
        node: Optional[Label] = self
        while node is not None:
            out.append(node.tw)
            node = node.parent
        out.reverse()
        return tuple(out)


def dominates(l: Label, lp: Label, delta: np.ndarray) -> bool:
    """True when no extension of ``lp`` can beat the same extension of ``l``.

    Compares the start-point upper bound of ``l`` (plus the distance the
    target itself may cover within each segment) against the relaxed lower
    bound of ``lp``, per segment, shifted by the collected duals.
    """
    if l.sigma > lp.sigma:
        return False
    if l.bmask & ~lp.bmask:
        return False
    return bool(np.all(l.gub + delta - l.lam <= lp.glb - lp.lam))


@dataclass
class PricingResult:
    tours: List[Tuple[Tuple[int, ...], float, float]]  # (sequence, cost, red)
    n_popped: int = 0
    n_created: int = 0
    used_fallback: bool = False


def solve_pricing(graph: TwGraph, duals: Sequence[float],
                  banned: Set[Tuple[int, int]] = frozenset(),
                  heuristic: bool = False,
                  dominance_disabled: bool = False,
                  eps: float = EPS_PRICING,
                  label_cap: int = DEFAULT_LABEL_CAP,
                  deadline: Optional[float] = None,
                  trace: Optional[Callable[[dict], None]] = None) -> PricingResult:
    """Best-first label search returning tours with reduced cost below -eps."""
    inst = graph.instance
    vmax = inst.v_max
    cap = inst.capacity
    n_nodes = graph.n_nodes
    duals = np.asarray(duals, dtype=float)

    deltas = [graph.seg_delta(v) for v in range(n_nodes)]
    seg_ranges = [graph.nodes[v].segments for v in range(n_nodes)]
    seg_end = [graph.seg_t1[list(r)] for r in seg_ranges]
    demands = np.array([graph.demand_of(v) for v in range(n_nodes)])
    tids = [graph.nodes[v].target_id for v in range(n_nodes)]

    counter = itertools.count()
    root = Label(0, 0.0, 0.0, 0, np.zeros(1), np.zeros(1),
                 float(duals[0]), None, next(counter))
    heap: List[Tuple[float, float, float, int, Label]] = []
    heappush(heap, (0.0, 0.0, 0.0, root.seq, root))
    store: List[List[Label]] = [[] for _ in range(n_nodes)]
    depot_store: List[Label] = []
    tours: List[Tuple[Tuple[int, ...], float, float]] = []
    best_red = INF
    n_created = 1
    n_popped = 0
    prunes = {"incumbent_bound": 0, "lb_threshold": 0, "exact_threshold": 0,
              "dominated": 0}

    while heap:
        _, _, _, _, lab = heappop(heap)
        if not lab.alive:
            continue
        n_popped += 1
        if trace is not None and (n_popped % 1000) == 0:
            trace({"event": "counters", "labels_popped": n_popped,
                   "labels_created": n_created, "prunes": dict(prunes),
                   "store_sizes": [len(s) for s in store]})
        if deadline is not None and (n_popped & 255) == 0 \
                and time.monotonic() > deadline:
            raise TimeLimitError("pricing deadline exceeded")
        u = lab.tw
        arc_u = graph.nodes[u].arc
        ux, uy = arc_u.position(lab.t)
        lfdt_row = graph.lfdt[u]
        for v in range(n_nodes):
            tid_v = tids[v]
            if tid_v == tids[u]:
                continue
            if banned and (u, v) in banned:
                continue
            if lab.t > lfdt_row[v]:
                continue
            sig2 = lab.sigma + demands[v]
            if sig2 > cap:
                continue
            if tid_v != 0 and (lab.bmask >> (tid_v - 1)) & 1:
                continue
            arc_v = graph.nodes[v].arc
            t2 = kernels.efat(ux, uy, lab.t, *arc_v.flat, vmax)
            if t2 == INF:
                continue
            bmask2 = lab.bmask
            if tid_v != 0:
                bmask2 |= 1 << (tid_v - 1)
            mrow = graph.max_lfdt[v]
            for i2 in range(1, inst.n_targets + 1):
                bit = 1 << (i2 - 1)
                if bmask2 & bit:
                    continue
                if sig2 + inst.target(i2).demand > cap or t2 > mrow[i2]:
                    bmask2 |= bit
            su = list(seg_ranges[u])
            sv = list(seg_ranges[v])
            gub2 = np.min(lab.gub[:, None] + graph.c_start[np.ix_(su, sv)],
                          axis=0)
            glb2 = np.min(lab.glb[:, None] + graph.c_seg[np.ix_(su, sv)],
                          axis=0)
            glb2 = np.where(t2 > seg_end[v], INF, glb2)
            lam2 = lab.lam + (float(duals[tid_v]) if tid_v != 0 else 0.0)
            n_created += 1
            if n_created > label_cap:
                raise LabelLimitError(
                    f"label cap {label_cap} exceeded during pricing")
            new = Label(v, t2, sig2, bmask2, gub2, glb2, lam2, lab,
                        next(counter))

            if v == 0:
                red_lb = glb2[0] - lam2
                if best_red <= red_lb:
                    prunes["incumbent_bound"] += 1
                    continue
                if red_lb >= -eps:
                    prunes["lb_threshold"] += 1
                    continue
                seq = new.sequence()
                result = convex.tour_cost(seq, graph)
                red = result.cost - lam2
                new.red = red
                if red >= -eps:
                    prunes["exact_threshold"] += 1
                    continue
                if any(d.red <= red for d in depot_store):
                    prunes["dominated"] += 1
                    continue
                depot_store[:] = [d for d in depot_store if not red <= d.red]
                depot_store.append(new)
                best_red = min(best_red, red)
                tours.append((seq, result.cost, red))
                if trace is not None:
                    trace({"event": "tour", "sequence": seq,
                           "cost": result.cost, "reduced_cost": red})
                continue

            if dominance_disabled:
                heappush(heap, (t2, sig2, float(np.min(glb2)), new.seq, new))
                continue
            if heuristic:
                kept = store[v]
                key = float(np.min(glb2))
                if kept and float(np.min(kept[0].glb)) <= key:
                    continue
                if kept:
                    kept[0].alive = False
                store[v] = [new]
                heappush(heap, (t2, sig2, key, new.seq, new))
                continue
            delta_v = deltas[v]
            if any(dominates(d, new, delta_v) for d in store[v]):
                prunes["dominated"] += 1
                continue
            survivors = []
            for d in store[v]:
                if dominates(new, d, delta_v):
                    d.alive = False
                else:
                    survivors.append(d)
            survivors.append(new)
            store[v] = survivors
            heappush(heap, (t2, sig2, float(np.min(glb2)), new.seq, new))

    if trace is not None:
        trace({"event": "pricing_done", "tours": len(tours),
               "labels_popped": n_popped, "labels_created": n_created,
               "prunes": dict(prunes)})
    return PricingResult(tours, n_popped, n_created)


def run_with_fallback(graph: TwGraph, duals: Sequence[float],
                      banned: Set[Tuple[int, int]] = frozenset(),
                      **kw) -> PricingResult:
    """Heuristic single-label-store pass first, full search only when empty."""
    res = solve_pricing(graph, duals, banned, heuristic=True, **kw)
    if res.tours:
        return res
    full = solve_pricing(graph, duals, banned, heuristic=False, **kw)
    full.n_popped += res.n_popped
    full.n_created += res.n_created
    full.used_fallback = True
    return full
