"""Restricted master problem: set-cover LP over a pool of tour columns.

Minimize total tour cost subject to a fleet-size cap and at-least-once
coverage of every target.  The LP relaxation is solved with HiGHS through
``scipy.optimize.linprog``; duals come from the constraint marginals with
signs normalized so the fleet dual is non-positive and coverage duals are
non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

INF = math.inf


@dataclass(frozen=True)
class Tour:
    """A priced column: depot-to-depot target-window sequence with its cost."""

    sequence: Tuple[int, ...]
    cost: float
    visited: frozenset  # target ids
    load: float

    @property
    def edge_list(self) -> List[Tuple[int, int]]:
        return list(zip(self.sequence[:-1], self.sequence[1:]))


class ColumnPool:
    """Deduplicating tour store shared across the search tree."""

    def __init__(self):
        self.tours: List[Tour] = []
        self._index: Dict[Tuple[int, ...], int] = {}

    def add(self, tour: Tour) -> bool:
        if tour.sequence in self._index:
            return False
        self._index[tour.sequence] = len(self.tours)
        self.tours.append(tour)
        return True

    def __len__(self) -> int:
        return len(self.tours)

    def __iter__(self):
        return iter(self.tours)


@dataclass
class RmpResult:
    status: str                      # "optimal" | "infeasible"
    objective: float = INF
    theta: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None  # duals[0] fleet, duals[i] coverage


def _usable(tours: Sequence[Tour], banned_edges) -> List[int]:
    if not banned_edges:
        return list(range(len(tours)))
    banned = set(banned_edges)
    return [i for i, t in enumerate(tours)
            if not any(e in banned for e in t.edge_list)]


def solve_rmp(tours: Sequence[Tour], n_targets: int, n_agents: int,
              banned_edges=(), dump_path: Optional[str] = None) -> RmpResult:
    """LP relaxation over the columns compatible with the edge bans."""
    idx = _usable(tours, banned_edges)
    if not idx:
        return RmpResult("infeasible")
    active = [tours[i] for i in idx]
    m = len(active)
    c = np.array([t.cost for t in active])
    # Row 0: fleet cap sum(theta) <= n_agents.
    # Rows 1..n: coverage written as -sum(alpha * theta) <= -1.
    A = np.zeros((n_targets + 1, m))
    A[0, :] = 1.0
    for j, t in enumerate(active):
        for tid in t.visited:
            A[tid, j] = -1.0
    b = np.concatenate(([float(n_agents)], -np.ones(n_targets)))
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0.0, None)] * m,
                  method="highs")
    if dump_path is not None:
        _dump_lp(dump_path, active, n_targets, n_agents, res)
    if res.status == 2:
        return RmpResult("infeasible")
    if res.status != 0:
        raise RuntimeError(f"LP solver failure: {res.message}")
    marg = np.asarray(res.ineqlin.marginals)
    duals = np.empty(n_targets + 1)
    duals[0] = min(0.0, float(marg[0]))
    duals[1:] = np.maximum(0.0, -marg[1:])
    theta = np.zeros(len(tours))
    theta[idx] = res.x
    return RmpResult("optimal", float(res.fun), theta, duals)


def edge_flows(tours: Sequence[Tour], theta: np.ndarray) -> Dict[Tuple[int, int], float]:
    """Aggregate edge flow x_e = sum of theta over tours using edge e."""
    flows: Dict[Tuple[int, int], float] = {}
    for t, v in zip(tours, theta):
        if v <= 0.0:
            continue
        for e in t.edge_list:
            flows[e] = flows.get(e, 0.0) + float(v)
    return flows


def extract_integer(tours: Sequence[Tour], theta: np.ndarray,
                    tol: float = 1e-6) -> Optional[List[Tour]]:
    """The selected tours when theta is integral within tol, else None."""
    chosen = []
    for t, v in zip(tours, theta):
        if abs(v - round(v)) > tol:
            return None
        if round(v) >= 1:
            chosen.extend([t] * int(round(v)))
    return chosen


def _dump_lp(path: str, tours: Sequence[Tour], n_targets: int,
             n_agents: int, res) -> None:
    with open(path, "w") as fh:
        fh.write(f"minimize sum c_j theta_j over {len(tours)} columns\n")
        for j, t in enumerate(tours):
            fh.write(f"  col {j}: cost={t.cost:.9g} seq={t.sequence} "
                     f"targets={sorted(t.visited)}\n")
        fh.write(f"s.t. sum theta <= {n_agents}\n")
        for i in range(1, n_targets + 1):
            cols = [j for j, t in enumerate(tours) if i in t.visited]
            fh.write(f"     coverage[{i}]: sum theta over {cols} >= 1\n")
        fh.write(f"status={res.status} objective="
                 f"{getattr(res, 'fun', None)}\n")
        if res.status == 0:
            fh.write(f"theta={list(map(float, res.x))}\n")
            fh.write(f"marginals={list(map(float, res.ineqlin.marginals))}\n")
