"""Target-window graph: nodes, time segments, and precomputed travel tables.

Nodes pair a target with one of its time windows (the depot is node 0 with a
single open-ended window).  Each window is subdivided into equal-time
segments; the tables hold, for every ordered pair with distinct targets:

* ``lfdt``      latest feasible departure times between windows,
* ``c_start``   straight-line cost between segment start points,
* ``c_seg``     relaxed-continuity minimum travel distance between segments.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from mtvrp import kernels
from mtvrp.geometry import LinearArc
from mtvrp.instance import Instance, Target, to_dict

INF = math.inf

CACHE_MAGIC = b"MTWG"
CACHE_VERSION = 1


@dataclass(frozen=True)
class TargetWindow:
    node: int
    target_id: int
    window_idx: int  # 1-based; depot is (0, 1)
    arc: LinearArc
    seg_start: int   # first index into the global segment arrays
    n_seg: int

    @property
    def segments(self) -> range:
        return range(self.seg_start, self.seg_start + self.n_seg)


def allocate_segments(target: Target, n_seg_tar: int) -> List[int]:
    """Per-window segment counts for one target.

    Every window except the longest gets ``max(1, floor(share * n_seg_tar))``
    where share is its length over the target's total window length; the
    longest window (lowest index on ties) receives the remainder, at least 1.
    """
    lengths = [a.end_time - a.start_time for a in target.windows]
    total = sum(lengths)
    longest = max(range(len(lengths)), key=lambda j: (lengths[j], -j))
    counts = []
    for j, ln in enumerate(lengths):
        if j == longest:
            counts.append(0)
        elif total > 0.0:
            counts.append(max(1, int((ln / total) * n_seg_tar)))
        else:
            counts.append(1)
    counts[longest] = max(1, n_seg_tar - sum(counts))
    return counts


class TwGraph:
    """Immutable after ``build``; shared read-only by the search modules."""

    def __init__(self, instance: Instance, n_seg_tar: int):
        self.instance = instance
        self.n_seg_tar = n_seg_tar
        self.horizon = instance.horizon()
        self.nodes: List[TargetWindow] = []
        depot_arc = LinearArc(0.0, self.horizon,
                              instance.depot[0], instance.depot[1], 0.0, 0.0)
        self._add_node(0, 1, depot_arc, 1)
        for tar in instance.targets:
            counts = allocate_segments(tar, n_seg_tar)
            for j, arc in enumerate(tar.windows):
                self._add_node(tar.id, j + 1, arc, counts[j])
        self.n_nodes = len(self.nodes)
        self.n_seg = self.nodes[-1].seg_start + self.nodes[-1].n_seg
        self.node_by_key: Dict[Tuple[int, int], int] = {
            (tw.target_id, tw.window_idx): tw.node for tw in self.nodes}
        self._build_segment_arrays()
        self.lfdt = np.full((self.n_nodes, self.n_nodes), -INF)
        self.c_start = np.full((self.n_seg, self.n_seg), INF)
        self.c_seg = np.full((self.n_seg, self.n_seg), INF)
        self.max_lfdt = np.full((self.n_nodes, instance.n_targets + 1), -INF)
        self.unreachable_targets: List[int] = []
        self.tour_cost_cache: Dict[tuple, object] = {}

    def _add_node(self, target_id: int, window_idx: int, arc: LinearArc,
                  n_seg: int) -> None:
        start = 0 if not self.nodes else (
            self.nodes[-1].seg_start + self.nodes[-1].n_seg)
        self.nodes.append(TargetWindow(len(self.nodes), target_id, window_idx,
                                       arc, start, n_seg))

    def _build_segment_arrays(self) -> None:
        n = self.n_seg
        self.seg_owner = np.empty(n, dtype=np.int32)
        self.seg_t0 = np.empty(n)
        self.seg_t1 = np.empty(n)
        self.seg_sx = np.empty(n)   # start point position
        self.seg_sy = np.empty(n)
        self.seg_len = np.empty(n)  # spatial length
        for tw in self.nodes:
            t0, t1 = tw.arc.start_time, tw.arc.end_time
            step = (t1 - t0) / tw.n_seg
            speed = tw.arc.speed()
            for k in range(tw.n_seg):
                g = tw.seg_start + k
                a = t0 + k * step
                b = t1 if k == tw.n_seg - 1 else t0 + (k + 1) * step
                self.seg_owner[g] = tw.node
                self.seg_t0[g] = a
                self.seg_t1[g] = b
                sx, sy = tw.arc.position(a)
                self.seg_sx[g] = sx
                self.seg_sy[g] = sy
                self.seg_len[g] = speed * (b - a)

    # -- queries ----------------------------------------------------------

    def target_of(self, node: int) -> int:
        return self.nodes[node].target_id

    def demand_of(self, node: int) -> float:
        tid = self.nodes[node].target_id
        return 0.0 if tid == 0 else self.instance.target(tid).demand

    def windows_of_target(self, target_id: int) -> List[int]:
        if target_id == 0:
            return [0]
        return [tw.node for tw in self.nodes if tw.target_id == target_id]

    def has_edge(self, u: int, v: int) -> bool:
        return self.nodes[u].target_id != self.nodes[v].target_id

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n_nodes)
                for v in range(self.n_nodes) if self.has_edge(u, v)]

    def seg_delta(self, node: int) -> np.ndarray:
        tw = self.nodes[node]
        return self.seg_len[tw.seg_start:tw.seg_start + tw.n_seg]


def _fill_tables(g: TwGraph) -> None:
    inst = g.instance
    vmax = inst.v_max
    depot_seg = 0
    for u in range(g.n_nodes):
        nu = g.nodes[u]
        for v in range(g.n_nodes):
            nv = g.nodes[v]
            if nu.target_id == nv.target_id:
                continue
            g.lfdt[u, v] = kernels.lfdt(*nu.arc.flat, *nv.arc.flat, vmax)
            for a in nu.segments:
                for b in nv.segments:
                    if b == depot_seg:
                        # Depot interception time is free within the horizon,
                        # so the start-point cost is the plain distance.
                        d = math.hypot(g.seg_sx[a] - inst.depot[0],
                                       g.seg_sy[a] - inst.depot[1])
                        if g.seg_t0[a] + d / vmax <= g.horizon:
                            g.c_start[a, b] = d
                    else:
                        g.c_start[a, b] = kernels.straight_cost(
                            g.seg_sx[a], g.seg_sy[a], g.seg_t0[a],
                            g.seg_sx[b], g.seg_sy[b], g.seg_t0[b], vmax)
                    g.c_seg[a, b] = kernels.segment_distance(
                        g.seg_t0[a], g.seg_t1[a], g.seg_sx[a], g.seg_sy[a],
                        nu.arc.vx, nu.arc.vy,
                        g.seg_t0[b], g.seg_t1[b], g.seg_sx[b], g.seg_sy[b],
                        nv.arc.vx, nv.arc.vy, vmax)
    for u in range(g.n_nodes):
        for tid in range(1, inst.n_targets + 1):
            if g.nodes[u].target_id == tid:
                continue
            g.max_lfdt[u, tid] = max(
                g.lfdt[u, v] for v in g.windows_of_target(tid))
        g.max_lfdt[u, 0] = g.lfdt[u, 0] if g.nodes[u].target_id != 0 else -INF
    # A target none of whose windows is depot-reachable makes the whole
    # instance infeasible.
    for tid in range(1, inst.n_targets + 1):
        if all(g.lfdt[0, v] == -INF for v in g.windows_of_target(tid)):
            g.unreachable_targets.append(tid)


def build(instance: Instance, n_seg_tar: int,
          cache_path: Optional[str] = None) -> TwGraph:
    """Build the graph and tables; optionally reuse a binary table cache."""
    g = TwGraph(instance, n_seg_tar)
    if cache_path is not None:
        try:
            load_tables(g, cache_path)
            return g
        except (OSError, ValueError, struct.error):
            pass
    _fill_tables(g)
    if cache_path is not None:
        save_tables(g, cache_path)
    return g


def instance_digest(instance: Instance, n_seg_tar: int) -> str:
    blob = json.dumps(to_dict(instance), sort_keys=True).encode()
    h = hashlib.sha256(blob)
    h.update(struct.pack("<q", n_seg_tar))
    return h.hexdigest()[:16]


def save_tables(g: TwGraph, path: str) -> None:
    """Little-endian float64 dump of the three tables plus max-LFDT."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", CACHE_MAGIC, CACHE_VERSION,
                             g.n_nodes, g.n_seg))
        for arr in (g.lfdt, g.c_start, g.c_seg, g.max_lfdt):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", len(g.unreachable_targets)))
        for tid in g.unreachable_targets:
            fh.write(struct.pack("<I", tid))


def load_tables(g: TwGraph, path: str) -> None:
    with open(path, "rb") as fh:
        magic, version, n_nodes, n_seg = struct.unpack("<4sIII", fh.read(16))
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError("bad table cache header")
        if n_nodes != g.n_nodes or n_seg != g.n_seg:
            raise ValueError("table cache dimensions do not match")
        shapes = [(n_nodes, n_nodes), (n_seg, n_seg), (n_seg, n_seg),
                  (n_nodes, g.max_lfdt.shape[1])]
        arrays = []
        for shape in shapes:
            count = shape[0] * shape[1]
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise ValueError("truncated table cache")
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
        g.lfdt, g.c_start, g.c_seg, g.max_lfdt = arrays
        (n_unreach,) = struct.unpack("<I", fh.read(4))
        g.unreachable_targets = [
            struct.unpack("<I", fh.read(4))[0] for _ in range(n_unreach)]
