# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interception kernels.

Mirrors the API of ``_kernels_py``; see that module for the math notes.
Arcs are flat floats ``(t0, t1, px, py, vx, vy)`` with position
``p + v*(t - t0)``.
"""

from libc.math cimport sqrt, hypot, fabs, isnan, NAN, INFINITY

cdef double _QUAD_EPS = 1e-12


cdef double _quad_earliest(double ox, double oy, double ot,
                           double t0, double px, double py,
                           double vx, double vy, double vmax) noexcept:
    cdef double wx = px - vx * t0 - ox
    cdef double wy = py - vy * t0 - oy
    cdef double vm2 = vmax * vmax
    cdef double a = vx * vx + vy * vy - vm2
    cdef double b = 2.0 * (wx * vx + wy * vy + vm2 * ot)
    cdef double c = wx * wx + wy * wy - vm2 * ot * ot
    cdef double scale = vm2 + vx * vx + vy * vy
    cdef double r, disc, sq, q, r1, r2, hi
    if fabs(a) <= _QUAD_EPS * scale:
        if fabs(b) <= _QUAD_EPS * scale * max(1.0, fabs(ot)):
            return ot if c <= 0.0 else INFINITY
        r = -c / b
        if b < 0.0:
            return r if r >= ot else ot
        return ot if c + b * ot <= 0.0 else INFINITY
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ot
    sq = sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else r1
    hi = r1 if r1 > r2 else r2
    return hi if hi >= ot else ot


cpdef (double, double) reach_interval(double ox, double oy, double ot,
                                      double t0, double t1,
                                      double px, double py,
                                      double vx, double vy, double vmax):
    cdef double lo = max(t0, ot)
    cdef double r
    if lo > t1:
        return (INFINITY, -INFINITY)
    r = _quad_earliest(ox, oy, ot, t0, px, py, vx, vy, vmax)
    if r > lo:
        lo = r
    if lo > t1:
        return (INFINITY, -INFINITY)
    return (lo, t1)


cpdef double efat(double ox, double oy, double ot,
                  double t0, double t1, double px, double py,
                  double vx, double vy, double vmax):
    cdef (double, double) iv = reach_interval(ox, oy, ot, t0, t1,
                                              px, py, vx, vy, vmax)
    return iv[0] if iv[0] <= iv[1] else INFINITY


cpdef double straight_cost(double ax, double ay, double at,
                           double bx, double by, double bt, double vmax):
    cdef double d = hypot(bx - ax, by - ay)
    if bt < at:
        return INFINITY
    if d > vmax * (bt - at) * (1.0 + 1e-12) + 1e-15:
        return INFINITY
    return d


cpdef double lfdt(double ft0, double ft1, double fpx, double fpy,
                  double fvx, double fvy,
                  double tt0, double tt1, double tpx, double tpy,
                  double tvx, double tvy, double vmax, double tol=1e-9):
    cdef double lo, hi, mid, ox, oy

    ox = fpx + fvx * (ft1 - ft0)
    oy = fpy + fvy * (ft1 - ft0)
    if efat(ox, oy, ft1, tt0, tt1, tpx, tpy, tvx, tvy, vmax) < INFINITY:
        return ft1
    if efat(fpx, fpy, ft0, tt0, tt1, tpx, tpy, tvx, tvy, vmax) == INFINITY:
        return -INFINITY
    lo = ft0
    hi = ft1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ox = fpx + fvx * (mid - ft0)
        oy = fpy + fvy * (mid - ft0)
        if efat(ox, oy, mid, tt0, tt1, tpx, tpy, tvx, tvy, vmax) < INFINITY:
            lo = mid
        else:
            hi = mid
    return lo


cdef double _point_seg_dist(double qx, double qy, double ax, double ay,
                            double bx, double by) noexcept:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    cdef double u
    if l2 <= 0.0:
        return hypot(qx - ax, qy - ay)
    u = ((qx - ax) * dx + (qy - ay) * dy) / l2
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    return hypot(qx - ax - u * dx, qy - ay - u * dy)


cdef (double, double) _departure_interval(double s, double rx, double ry,
                                          double a0, double a1,
                                          double px, double py,
                                          double vx, double vy,
                                          double vmax) noexcept:
    cdef double hi = min(a1, s)
    cdef double lo = a0
    cdef double wx, wy, vm2, a, b, c, scale, r, disc, sq, q, r1, r2, low_root
    if hi < lo:
        return (INFINITY, -INFINITY)
    wx = px - vx * a0 - rx
    wy = py - vy * a0 - ry
    vm2 = vmax * vmax
    a = vx * vx + vy * vy - vm2
    b = 2.0 * (wx * vx + wy * vy + vm2 * s)
    c = wx * wx + wy * wy - vm2 * s * s
    scale = vm2 + vx * vx + vy * vy
    if fabs(a) <= _QUAD_EPS * scale:
        if fabs(b) <= _QUAD_EPS * scale * max(1.0, fabs(s)):
            if c <= 0.0:
                return (lo, hi)
            return (INFINITY, -INFINITY)
        r = -c / b
        if b > 0.0:
            if r < hi:
                hi = r
        else:
            if r > lo:
                lo = r
        if lo <= hi:
            return (lo, hi)
        return (INFINITY, -INFINITY)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return (lo, hi)
    sq = sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else r1
    low_root = r1 if r1 < r2 else r2
    if low_root < hi:
        hi = low_root
    if lo <= hi:
        return (lo, hi)
    return (INFINITY, -INFINITY)


cdef double _seg_inner(double s, double a0, double a1, double apx, double apy,
                       double avx, double avy, double b0, double bpx,
                       double bpy, double bvx, double bvy,
                       double vmax) noexcept:
    cdef double rx = bpx + bvx * (s - b0)
    cdef double ry = bpy + bvy * (s - b0)
    cdef (double, double) iv = _departure_interval(
        s, rx, ry, a0, a1, apx, apy, avx, avy, vmax)
    if iv[0] > iv[1]:
        return INFINITY
    return _point_seg_dist(rx, ry,
                           apx + avx * (iv[0] - a0), apy + avy * (iv[0] - a0),
                           apx + avx * (iv[1] - a0), apy + avy * (iv[1] - a0))


cpdef double segment_distance(double a0, double a1, double apx, double apy,
                              double avx, double avy,
                              double b0, double b1, double bpx, double bpy,
                              double bvx, double bvy, double vmax,
                              double tol=1e-10):
    cdef double s_lo, s_hi, lo, hi, mid, best, invphi, x1, x2, f1, f2
    if _seg_inner(b1, a0, a1, apx, apy, avx, avy,
                  b0, bpx, bpy, bvx, bvy, vmax) == INFINITY:
        return INFINITY
    if _seg_inner(b0, a0, a1, apx, apy, avx, avy,
                  b0, bpx, bpy, bvx, bvy, vmax) < INFINITY:
        s_lo = b0
    else:
        lo = b0
        hi = b1
        while hi - lo > max(tol, 1e-12 * (1.0 + fabs(b1))):
            mid = 0.5 * (lo + hi)
            if _seg_inner(mid, a0, a1, apx, apy, avx, avy,
                          b0, bpx, bpy, bvx, bvy, vmax) < INFINITY:
                hi = mid
            else:
                lo = mid
        s_lo = hi
    s_hi = b1
    f1 = _seg_inner(s_lo, a0, a1, apx, apy, avx, avy,
                    b0, bpx, bpy, bvx, bvy, vmax)
    f2 = _seg_inner(s_hi, a0, a1, apx, apy, avx, avy,
                    b0, bpx, bpy, bvx, bvy, vmax)
    best = min(f1, f2)
    if s_hi - s_lo > tol:
        invphi = (sqrt(5.0) - 1.0) / 2.0
        x1 = s_hi - invphi * (s_hi - s_lo)
        x2 = s_lo + invphi * (s_hi - s_lo)
        f1 = _seg_inner(x1, a0, a1, apx, apy, avx, avy,
                        b0, bpx, bpy, bvx, bvy, vmax)
        f2 = _seg_inner(x2, a0, a1, apx, apy, avx, avy,
                        b0, bpx, bpy, bvx, bvy, vmax)
        best = min(best, min(f1, f2))
        while s_hi - s_lo > tol:
            if f1 <= f2:
                s_hi = x2
                x2 = x1
                f2 = f1
                x1 = s_hi - invphi * (s_hi - s_lo)
                f1 = _seg_inner(x1, a0, a1, apx, apy, avx, avy,
                                b0, bpx, bpy, bvx, bvy, vmax)
            else:
                s_lo = x1
                x1 = x2
                f1 = f2
                x2 = s_lo + invphi * (s_hi - s_lo)
                f2 = _seg_inner(x2, a0, a1, apx, apy, avx, avy,
                                b0, bpx, bpy, bvx, bvy, vmax)
            if f1 < best:
                best = f1
            if f2 < best:
                best = f2
    return max(0.0, best)
