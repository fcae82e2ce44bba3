"""Pure-Python interception kernels.

Same API as the compiled ``_kernels`` extension; used as a fallback when the
extension is unavailable or when MTVRP_PURE_PYTHON=1 is set.

All arcs are passed as flat floats ``(t0, t1, px, py, vx, vy)`` where the
position at time t is ``(px + vx*(t - t0), py + vy*(t - t0))``.
"""

import math

INF = math.inf

# Relative threshold below which the quadratic reachability equation is
# treated as linear (target closing speed equals the agent speed limit).
_QUAD_EPS = 1e-12


def _quad_earliest(ox, oy, ot, t0, px, py, vx, vy, vmax):
    """Earliest t >= ot with ||p(t) - o|| <= vmax*(t - ot), on the arc's line.

    The constraint is a single quadratic inequality in t with non-positive
    leading coefficient, so its feasible set within [ot, inf) is a ray
    [r, inf).  Returns r, or +inf if no finite t works.
    """
    wx = px - vx * t0 - ox
    wy = py - vy * t0 - oy
    vm2 = vmax * vmax
    a = vx * vx + vy * vy - vm2
    b = 2.0 * (wx * vx + wy * vy + vm2 * ot)
    c = wx * wx + wy * wy - vm2 * ot * ot
    scale = vm2 + vx * vx + vy * vy
    if abs(a) <= _QUAD_EPS * scale:
        # Linear branch: target moves at the speed limit.
        if abs(b) <= _QUAD_EPS * scale * max(1.0, abs(ot)):
            return ot if c <= 0.0 else INF
        r = -c / b
        if b < 0.0:
            return r if r >= ot else ot
        # b > 0: feasible only for t <= r, which lies behind ot unless the
        # origin already touches the arc at ot.
        return ot if c + b * ot <= 0.0 else INF
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        # Downward parabola with no roots: f < 0 everywhere, but f(ot) >= 0
        # analytically, so this only happens through rounding at a tangency.
        return ot
    sq = math.sqrt(disc)
    # Stable root pair: a < 0, so the feasible ray starts at the larger root.
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else r1
    hi = max(r1, r2)
    return hi if hi >= ot else ot


def reach_interval(ox, oy, ot, t0, t1, px, py, vx, vy, vmax):
    """Feasible interception times of an arc from a space-time origin.

    Returns ``(lo, hi)`` with ``lo > hi`` meaning the empty interval.
    """
    lo = max(t0, ot)
    if lo > t1:
        return (INF, -INF)
    r = _quad_earliest(ox, oy, ot, t0, px, py, vx, vy, vmax)
    lo = max(lo, r)
    if lo > t1:
        return (INF, -INF)
    return (lo, t1)


def efat(ox, oy, ot, t0, t1, px, py, vx, vy, vmax):
    """Earliest feasible arrival time at an arc, or +inf."""
    lo, hi = reach_interval(ox, oy, ot, t0, t1, px, py, vx, vy, vmax)
    return lo if lo <= hi else INF


def straight_cost(ax, ay, at, bx, by, bt, vmax):
    """Euclidean distance a->b if reachable in time at vmax, else +inf."""
    d = math.hypot(bx - ax, by - ay)
    if bt < at:
        return INF
    if d > vmax * (bt - at) * (1.0 + 1e-12) + 1e-15:
        return INF
    return d


def lfdt(ft0, ft1, fpx, fpy, fvx, fvy,
         tt0, tt1, tpx, tpy, tvx, tvy, vmax, tol=1e-9):
    """Latest departure time from the first arc that still reaches the second.

    Departure feasibility is monotone decreasing in time (an agent can always
    ride the first target forward), so the feasible set is [ft0, t*] and t*
    is found by bisection.  Returns -inf when no departure time works.
    """

    def feasible(t):
        ox = fpx + fvx * (t - ft0)
        oy = fpy + fvy * (t - ft0)
        return efat(ox, oy, t, tt0, tt1, tpx, tpy, tvx, tvy, vmax) < INF

    if feasible(ft1):
        return ft1
    if not feasible(ft0):
        return -INF
    lo, hi = ft0, ft1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _point_seg_dist(qx, qy, ax, ay, bx, by):
    """Distance from point q to the spatial segment a-b."""
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        return math.hypot(qx - ax, qy - ay)
    u = ((qx - ax) * dx + (qy - ay) * dy) / l2
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    return math.hypot(qx - ax - u * dx, qy - ay - u * dy)


def _departure_interval(s, rx, ry, a0, a1, px, py, vx, vy, vmax):
    """Departure times t in [a0, min(a1, s)] with ||r - p(t)|| <= vmax*(s - t).

    Same quadratic as reachability but solved for the departure side.
    Returns ``(lo, hi)`` with ``lo > hi`` meaning empty.
    """
    hi = min(a1, s)
    lo = a0
    if hi < lo:
        return (INF, -INF)
    wx = px - vx * a0 - rx
    wy = py - vy * a0 - ry
    vm2 = vmax * vmax
    a = vx * vx + vy * vy - vm2
    b = 2.0 * (wx * vx + wy * vy + vm2 * s)
    c = wx * wx + wy * wy - vm2 * s * s
    scale = vm2 + vx * vx + vy * vy
    if abs(a) <= _QUAD_EPS * scale:
        if abs(b) <= _QUAD_EPS * scale * max(1.0, abs(s)):
            return (lo, hi) if c <= 0.0 else (INF, -INF)
        r = -c / b
        if b > 0.0:
            hi = min(hi, r)
        else:
            lo = max(lo, r)
        return (lo, hi) if lo <= hi else (INF, -INF)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return (lo, hi)
    sq = math.sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else r1
    # a < 0: feasible outside the roots; t <= s selects the lower ray.
    hi = min(hi, min(r1, r2))
    return (lo, hi) if lo <= hi else (INF, -INF)


def segment_distance(a0, a1, apx, apy, avx, avy,
                     b0, b1, bpx, bpy, bvx, bvy, vmax, tol=1e-10):
    """Minimum travel distance from one moving segment to a later one.

    Minimizes ||r(s) - p(t)|| over departure t on the first segment and
    arrival s on the second, subject to the speed limit.  The inner
    minimization over t is closed-form (point-to-segment distance over the
    speed-feasible departure range); the outer 1-D convex problem over s is
    solved by golden-section search.  Returns +inf when infeasible.
    """

    def inner(s):
        rx = bpx + bvx * (s - b0)
        ry = bpy + bvy * (s - b0)
        tlo, thi = _departure_interval(
            s, rx, ry, a0, a1, apx, apy, avx, avy, vmax)
        if tlo > thi:
            return INF
        # The departure interval's spatial image is a segment.
        x0 = apx + avx * (tlo - a0)
        y0 = apy + avy * (tlo - a0)
        x1 = apx + avx * (thi - a0)
        y1 = apy + avy * (thi - a0)
        return _point_seg_dist(rx, ry, x0, y0, x1, y1)

    # Arrival feasibility is monotone in s: find the earliest feasible s.
    if inner(b1) == INF:
        return INF
    if inner(b0) < INF:
        s_lo = b0
    else:
        lo, hi = b0, b1
        while hi - lo > max(tol, 1e-12 * (1.0 + abs(b1))):
            mid = 0.5 * (lo + hi)
            if inner(mid) < INF:
                hi = mid
            else:
                lo = mid
        s_lo = hi
    s_hi = b1
    best = min(inner(s_lo), inner(s_hi))
    if s_hi - s_lo > tol:
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = s_hi - invphi * (s_hi - s_lo)
        x2 = s_lo + invphi * (s_hi - s_lo)
        f1 = inner(x1)
        f2 = inner(x2)
        best = min(best, f1, f2)
        while s_hi - s_lo > tol:
            if f1 <= f2:
                s_hi, x2, f2 = x2, x1, f1
                x1 = s_hi - invphi * (s_hi - s_lo)
                f1 = inner(x1)
            else:
                s_lo, x1, f1 = x1, x2, f2
                x2 = s_lo + invphi * (s_hi - s_lo)
                f2 = inner(x2)
            best = min(best, f1, f2)
    return max(0.0, best)
