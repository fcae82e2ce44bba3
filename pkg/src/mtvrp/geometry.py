"""Closed-form kinematics for intercepting linearly moving points.

A speed-limited agent departs a space-time point and must meet a point moving
along a linear arc inside the arc's time interval.  Reachability reduces to a
single quadratic inequality in the interception time, which gives closed
forms for the earliest feasible arrival time (EFAT) and, via bisection on the
departure time, the latest feasible departure time (LFDT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from mtvrp import kernels

INF = math.inf

LFDT_TOL = 1e-9


@dataclass(frozen=True)
class SpaceTimePoint:
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0.0:
            raise ValueError(f"time must be finite and non-negative, got {self.t}")

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LinearArc:
    """Constant-velocity motion over a time interval.

    ``position(t) = start_position + velocity * (t - start_time)``.
    """

    start_time: float
    end_time: float
    px: float
    py: float
    vx: float
    vy: float

    def __post_init__(self):
        if self.start_time > self.end_time:
            raise ValueError(
                f"arc start_time {self.start_time} > end_time {self.end_time}")

    def position(self, t: float) -> Tuple[float, float]:
        dt = t - self.start_time
        return (self.px + self.vx * dt, self.py + self.vy * dt)

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def flat(self) -> Tuple[float, float, float, float, float, float]:
        return (self.start_time, self.end_time, self.px, self.py,
                self.vx, self.vy)


def reach_time_bounds(origin: SpaceTimePoint, arc: LinearArc,
                      v_max: float) -> Optional[Tuple[float, float]]:
    """Interception times of ``arc`` reachable from ``origin`` at ``v_max``.

    Returns the closed interval [t_lo, t_hi] or None when empty.
    """
    lo, hi = kernels.reach_interval(origin.x, origin.y, origin.t,
                                    *arc.flat, v_max)
    if lo > hi:
        return None
    return (lo, hi)


def efat_arc(origin: SpaceTimePoint, arc: LinearArc, v_max: float) -> float:
    """Earliest feasible arrival time at ``arc``, or +inf."""
    return kernels.efat(origin.x, origin.y, origin.t, *arc.flat, v_max)


def lfdt_arc(from_arc: LinearArc, to_arc: LinearArc, v_max: float,
             tol: float = LFDT_TOL) -> float:
    """Latest departure time from ``from_arc`` still reaching ``to_arc``.

    Returns -inf when no departure time works.  An agent may always ride the
    departure target forward in time (targets respect the speed limit), so
    the feasible departure set is a closed prefix of the window and bisection
    applies.
    """
    return kernels.lfdt(*from_arc.flat, *to_arc.flat, v_max, tol)


def straight_line_cost(a: SpaceTimePoint, b: SpaceTimePoint,
                       v_max: float) -> float:
    """Euclidean distance a->b if reachable in time at ``v_max``, else +inf."""
    return kernels.straight_cost(a.x, a.y, a.t, b.x, b.y, b.t, v_max)
