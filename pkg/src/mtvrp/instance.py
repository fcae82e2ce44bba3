"""Problem instance and solution data model, JSON I/O, generation, checking.

Schema (floats serialized with 17 significant digits):

Instance JSON::

    {"v_max": f, "capacity": f, "n_agents": k, "depot": [x, y],
     "targets": [{"id": i, "demand": f,
                  "windows": [{"t0": f, "t1": f, "p0": [x, y],
                               "vel": [vx, vy]}]}]}

Solution JSON::

    {"cost": f, "tours": [{"sequence": [{"target": i, "window": j,
                                         "time": t, "position": [x, y]}],
                           "load": f}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from mtvrp.geometry import LinearArc, SpaceTimePoint, efat_arc


class InstanceError(ValueError):
    """Schema or invariant violation; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Target:
    id: int
    demand: float
    windows: Tuple[LinearArc, ...]


@dataclass(frozen=True)
class Instance:
    n_agents: int
    v_max: float
    capacity: float
    depot: Tuple[float, float]
    targets: Tuple[Target, ...]

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    def target(self, tid: int) -> Target:
        return self.targets[tid - 1]

    def horizon(self) -> float:
        """Finite stand-in for the depot's open-ended window.

        Max window end plus the return time from the farthest point any
        target occupies inside its windows.
        """
        max_end = 0.0
        far = 0.0
        dx, dy = self.depot
        for tar in self.targets:
            for arc in tar.windows:
                max_end = max(max_end, arc.end_time)
                for t in (arc.start_time, arc.end_time):
                    px, py = arc.position(t)
                    far = max(far, math.hypot(px - dx, py - dy))
        return max_end + far / self.v_max + 1.0


@dataclass(frozen=True)
class TourStop:
    target: int
    window: int
    time: float
    position: Tuple[float, float]


@dataclass(frozen=True)
class SolutionTour:
    sequence: Tuple[TourStop, ...]
    load: float


@dataclass(frozen=True)
class Solution:
    cost: float
    tours: Tuple[SolutionTour, ...]


@dataclass
class VerifyReport:
    ok: bool
    violations: List[str] = field(default_factory=list)
    recomputed_cost: float = 0.0


def _f(x: float) -> float:
    return float(x)


def _fmt(x: float) -> float:
    # json round-trips Python floats exactly; repr gives 17 significant digits
    return float(repr(float(x)))


def _validate(inst: Instance) -> None:
    if inst.n_agents < 1:
        raise InstanceError("n_agents", f"must be >= 1, got {inst.n_agents}")
    if not (inst.v_max > 0.0):
        raise InstanceError("v_max", f"must be > 0, got {inst.v_max}")
    if inst.capacity < 0.0:
        raise InstanceError("capacity", f"must be >= 0, got {inst.capacity}")
    for idx, tar in enumerate(inst.targets):
        path = f"targets[{idx}]"
        if tar.id != idx + 1:
            raise InstanceError(f"{path}.id",
                                f"ids must be 1..n in order, got {tar.id}")
        if tar.demand < 0.0:
            raise InstanceError(f"{path}.demand", "must be >= 0")
        if tar.demand > inst.capacity:
            raise InstanceError(f"{path}.demand",
                                f"{tar.demand} exceeds capacity {inst.capacity}")
        if not tar.windows:
            raise InstanceError(f"{path}.windows", "must be non-empty")
        prev_end = -math.inf
        for j, arc in enumerate(tar.windows):
            wpath = f"{path}.windows[{j}]"
            if arc.start_time < 0.0:
                raise InstanceError(f"{wpath}.t0", "must be >= 0")
            if arc.start_time > arc.end_time:
                raise InstanceError(f"{wpath}", "t0 > t1")
            if arc.start_time < prev_end:
                raise InstanceError(f"{wpath}",
                                    "windows must be disjoint and sorted")
            prev_end = arc.end_time
            if arc.speed() > inst.v_max * (1.0 + 1e-9):
                raise InstanceError(
                    f"{wpath}.vel",
                    f"target speed {arc.speed():.6g} exceeds v_max {inst.v_max}")


def _require(obj, key, path, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceError(f"{path}.{key}", "missing field")
    val = obj[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if kind is list and isinstance(val, list):
        return val
    raise InstanceError(f"{path}.{key}", f"expected {kind.__name__}")


def _pair(obj, key, path):
    val = _require(obj, key, path, list)
    if len(val) != 2 or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        raise InstanceError(f"{path}.{key}", "expected [x, y] pair of numbers")
    return (float(val[0]), float(val[1]))


def from_dict(data: dict) -> Instance:
    targets = []
    raw_targets = _require(data, "targets", "$", list)
    for i, raw in enumerate(raw_targets):
        path = f"$.targets[{i}]"
        windows = []
        for j, w in enumerate(_require(raw, "windows", path, list)):
            wpath = f"{path}.windows[{j}]"
            t0 = _require(w, "t0", wpath, float)
            t1 = _require(w, "t1", wpath, float)
            if t0 > t1:
                raise InstanceError(wpath, f"t0 {t0} > t1 {t1}")
            p0 = _pair(w, "p0", wpath)
            vel = _pair(w, "vel", wpath)
            windows.append(LinearArc(t0, t1, p0[0], p0[1], vel[0], vel[1]))
        targets.append(Target(id=_require(raw, "id", path, int),
                              demand=_require(raw, "demand", path, float),
                              windows=tuple(windows)))
    inst = Instance(n_agents=_require(data, "n_agents", "$", int),
                    v_max=_require(data, "v_max", "$", float),
                    capacity=_require(data, "capacity", "$", float),
                    depot=_pair(data, "depot", "$"),
                    targets=tuple(targets))
    _validate(inst)
    return inst


def to_dict(inst: Instance) -> dict:
    return {
        "v_max": _fmt(inst.v_max),
        "capacity": _fmt(inst.capacity),
        "n_agents": inst.n_agents,
        "depot": [_fmt(inst.depot[0]), _fmt(inst.depot[1])],
        "targets": [
            {
                "id": tar.id,
                "demand": _fmt(tar.demand),
                "windows": [
                    {"t0": _fmt(a.start_time), "t1": _fmt(a.end_time),
                     "p0": [_fmt(a.px), _fmt(a.py)],
                     "vel": [_fmt(a.vx), _fmt(a.vy)]}
                    for a in tar.windows
                ],
            }
            for tar in inst.targets
        ],
    }


def load(path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError("$", f"invalid JSON: {exc}") from exc
    return from_dict(data)


def save(inst: Instance, path) -> None:
    _validate(inst)
    with open(path, "w") as fh:
        json.dump(to_dict(inst), fh, indent=2)
        fh.write("\n")


def solution_to_dict(sol: Solution) -> dict:
    return {
        "cost": _fmt(sol.cost),
        "tours": [
            {
                "sequence": [
                    {"target": s.target, "window": s.window,
                     "time": _fmt(s.time),
                     "position": [_fmt(s.position[0]), _fmt(s.position[1])]}
                    for s in tour.sequence
                ],
                "load": _fmt(tour.load),
            }
            for tour in sol.tours
        ],
    }


def solution_from_dict(data: dict) -> Solution:
    tours = []
    for i, raw in enumerate(_require(data, "tours", "$", list)):
        path = f"$.tours[{i}]"
        stops = []
        for j, s in enumerate(_require(raw, "sequence", path, list)):
            spath = f"{path}.sequence[{j}]"
            stops.append(TourStop(
                target=_require(s, "target", spath, int),
                window=_require(s, "window", spath, int),
                time=_require(s, "time", spath, float),
                position=_pair(s, "position", spath)))
        tours.append(SolutionTour(sequence=tuple(stops),
                                  load=_require(raw, "load", path, float)))
    return Solution(cost=_require(data, "cost", "$", float),
                    tours=tuple(tours))


def save_solution(sol: Solution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(sol), fh, indent=2)
        fh.write("\n")


def load_solution(path) -> Solution:
    with open(path) as fh:
        data = json.load(fh)
    return solution_from_dict(data)


def generate(seed: int,
             n_tar: int,
             n_agt: int,
             capacity: Optional[float] = None,
             windows_per_target: int = 2,
             total_window_len: float = 20.0,
             arena_size: float = 40.0,
             v_max: float = 1.0,
             horizon: float = 100.0,
             demand: float = 1.0) -> Instance:
    """Random instance; deterministic in ``seed``.

    Every generated target-window is reachable from the depot at its window
    start by an agent departing at time 0 (targets are resampled otherwise).
    Target speeds are uniform in [0, 0.5*v_max]; window starts are uniform
    over the horizon; per-target window lengths sum to ``total_window_len``.
    """
    if n_tar < 1 or n_agt < 1 or windows_per_target < 1:
        raise ValueError("n_tar, n_agt and windows_per_target must be positive")
    if total_window_len <= 0 or arena_size <= 0 or v_max <= 0 or horizon <= 0:
        raise ValueError("lengths, arena, speeds and horizon must be positive")
    if capacity is None:
        capacity = float(math.ceil(n_tar / n_agt))
    rng = np.random.default_rng(seed)
    depot = (0.0, 0.0)
    depot_pt = SpaceTimePoint(depot[0], depot[1], 0.0)
    targets = []
    for tid in range(1, n_tar + 1):
        while True:
            # Split the total window length into windows_per_target parts.
            cuts = np.sort(rng.uniform(0.1, 0.9, size=windows_per_target - 1))
            lens = np.diff(np.concatenate(([0.0], cuts, [1.0]))) * total_window_len
            starts = np.sort(rng.uniform(0.0, horizon, size=windows_per_target))
            windows = []
            ok = True
            prev_end = -1.0
            for j in range(windows_per_target):
                t0 = float(starts[j])
                t1 = t0 + float(lens[j])
                if t0 <= prev_end:
                    ok = False
                    break
                prev_end = t1
                px, py = rng.uniform(-arena_size / 2, arena_size / 2, size=2)
                speed = rng.uniform(0.0, 0.5 * v_max)
                angle = rng.uniform(0.0, 2.0 * math.pi)
                arc = LinearArc(t0, t1, float(px), float(py),
                                speed * math.cos(angle),
                                speed * math.sin(angle))
                # Reachable from the depot at the window start, departing at 0.
                if efat_arc(depot_pt, arc, v_max) > t0:
                    ok = False
                    break
                windows.append(arc)
            if ok:
                targets.append(Target(id=tid, demand=demand,
                                      windows=tuple(windows)))
                break
    inst = Instance(n_agents=n_agt, v_max=v_max, capacity=capacity,
                    depot=depot, targets=tuple(targets))
    _validate(inst)
    return inst


def verify(inst: Instance, sol: Solution, tol: float = 1e-6) -> VerifyReport:
    """Independent feasibility and cost check of a solution."""
    report = VerifyReport(ok=True)

    def fail(msg: str) -> None:
        report.ok = False
        report.violations.append(msg)

    if len(sol.tours) > inst.n_agents:
        fail(f"{len(sol.tours)} tours exceed {inst.n_agents} agents")
    seen = {}
    total = 0.0
    for ti, tour in enumerate(sol.tours):
        seq = tour.sequence
        if len(seq) < 2:
            fail(f"tour {ti}: fewer than two waypoints")
            continue
        for end, name in ((seq[0], "start"), (seq[-1], "end")):
            if end.target != 0:
                fail(f"tour {ti}: does not {name} at the depot")
            elif (abs(end.position[0] - inst.depot[0]) > tol
                  or abs(end.position[1] - inst.depot[1]) > tol):
                fail(f"tour {ti}: depot {name} position mismatch")
        load = 0.0
        length = 0.0
        for si, stop in enumerate(seq):
            if stop.target != 0:
                if stop.target in seen:
                    fail(f"target {stop.target} covered more than once")
                seen[stop.target] = (ti, si)
                tar = inst.target(stop.target)
                load += tar.demand
                if not (1 <= stop.window <= len(tar.windows)):
                    fail(f"tour {ti} stop {si}: window index {stop.window} "
                         f"out of range")
                else:
                    arc = tar.windows[stop.window - 1]
                    if not (arc.start_time - tol <= stop.time
                            <= arc.end_time + tol):
                        fail(f"tour {ti} stop {si}: time {stop.time:.6g} "
                             f"outside window [{arc.start_time:.6g}, "
                             f"{arc.end_time:.6g}]")
                    else:
                        px, py = arc.position(stop.time)
                        if math.hypot(px - stop.position[0],
                                      py - stop.position[1]) > tol * (
                                          1.0 + abs(px) + abs(py)):
                            fail(f"tour {ti} stop {si}: position does not "
                                 f"match target trajectory")
            if si > 0:
                prev = seq[si - 1]
                d = math.hypot(stop.position[0] - prev.position[0],
                               stop.position[1] - prev.position[1])
                dt = stop.time - prev.time
                if dt < -tol:
                    fail(f"tour {ti} stop {si}: time decreases")
                elif d > inst.v_max * max(dt, 0.0) * (1.0 + tol) + tol:
                    fail(f"tour {ti} stop {si}: requires speed above v_max")
                length += d
        if load > inst.capacity + tol:
            fail(f"tour {ti}: load {load:.6g} exceeds capacity "
                 f"{inst.capacity:.6g}")
        if abs(load - tour.load) > tol * (1.0 + abs(load)):
            fail(f"tour {ti}: reported load {tour.load:.6g} != {load:.6g}")
        total += length
    missing = [t.id for t in inst.targets if t.id not in seen]
    if missing:
        fail(f"targets not covered: {missing}")
    report.recomputed_cost = total
    if abs(total - sol.cost) > tol * (1.0 + abs(sol.cost)):
        fail(f"reported cost {sol.cost:.9g} != recomputed {total:.9g}")
    return report
