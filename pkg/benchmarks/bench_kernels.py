"""Benchmark the compiled geometry kernels against the pure-Python fallback.

Run with:  python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from mtvrp import _kernels_py as pure

try:
    from mtvrp import _kernels as compiled
except ImportError:
    compiled = None


def make_cases(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        ox, oy = rng.uniform(-20, 20, 2)
        ot = rng.uniform(0, 50)
        t0 = ot + rng.uniform(0, 30)
        t1 = t0 + rng.uniform(1, 20)
        px, py = rng.uniform(-20, 20, 2)
        sp = rng.uniform(0, 0.5)
        ang = rng.uniform(0, 2 * np.pi)
        cases.append((ox, oy, ot, t0, t1, px, py,
                      sp * np.cos(ang), sp * np.sin(ang)))
    return cases


def bench(label, fn, cases, reps=1):
    t0 = time.perf_counter()
    acc = 0.0
    for _ in range(reps):
        for c in cases:
            acc += fn(*c, 1.0) if not isinstance(fn(*c, 1.0), tuple) else 0.0
    dt = time.perf_counter() - t0
    print(f"  {label:10s} {dt*1e3:8.1f} ms  ({dt / (reps * len(cases)) * 1e6:.2f} us/call)")
    return acc


def main():
    cases = make_cases(20000)
    lfdt_cases = []
    rng = np.random.default_rng(1)
    for _ in range(2000):
        a = make_cases(1, rng.integers(1 << 30))[0]
        b = make_cases(1, rng.integers(1 << 30))[0]
        lfdt_cases.append(a[3:9] + b[3:9])

    backends = [("pure", pure)]
    if compiled is not None:
        backends.append(("compiled", compiled))
    else:
        print("compiled extension not available; showing pure only")

    print("efat (earliest arrival, closed form):")
    for name, mod in backends:
        bench(name, mod.efat, cases, reps=5)
    print("lfdt (latest departure, bisection):")
    for name, mod in backends:
        t0 = time.perf_counter()
        for c in lfdt_cases:
            mod.lfdt(*c, 1.0)
        dt = time.perf_counter() - t0
        print(f"  {name:10s} {dt*1e3:8.1f} ms  ({dt / len(lfdt_cases) * 1e6:.2f} us/call)")
    print("segment_distance (golden-section over relaxed cones):")
    for name, mod in backends:
        t0 = time.perf_counter()
        for c in lfdt_cases[:500]:
            mod.segment_distance(*c, 1.0)
        dt = time.perf_counter() - t0
        print(f"  {name:10s} {dt*1e3:8.1f} ms  ({dt / 500 * 1e6:.2f} us/call)")


if __name__ == "__main__":
    main()
