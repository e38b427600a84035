#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python reference.

Runs the shallow-water sweep and the tridiagonal solve at several sizes
with both backends, reporting wall time, speedup, and the largest
absolute difference between the results (which must be zero: the two
backends are required to agree bitwise).

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from boussamr import _kernels_py

try:
    from boussamr import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_swe_state(n, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    b = -4000.0 + 300.0 * np.sin(7.0 * math.pi * x)
    h = np.maximum(0.0, -b) + rng.uniform(-1.0, 1.0, n)
    # A dry island in the middle keeps the wet/dry branches honest.
    island = slice(n // 2, n // 2 + max(2, n // 50))
    h[island] = 0.0
    hu = np.where(h > 0.0, rng.uniform(-5.0, 5.0, n) * h, 0.0)
    return h, hu, b


def make_tridiag(n, seed):
    rng = np.random.default_rng(seed)
    sub = rng.uniform(-1.0, 1.0, n)
    sup = rng.uniform(-1.0, 1.0, n)
    sub[0] = 0.0
    sup[-1] = 0.0
    diag = 2.5 + np.abs(sub) + np.abs(sup) + rng.uniform(0.0, 1.0, n)
    rhs = rng.uniform(-1.0, 1.0, n)
    return sub, diag, sup, rhs


def best_of(fn, repeats):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def max_diff(a, b):
    worst = 0.0
    for x, y in zip(a, b):
        if x is None or y is None:
            continue
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.size:
            worst = max(worst, float(np.max(np.abs(x - y))))
    return worst


def bench_swe_sweep(n, repeats):
    h, hu, b = make_swe_state(n, seed=n)
    args = (h, hu, b, 9.81, 1.0 / n, 1e-4, 1e-3, _kernels_py.LIMITER_MC)
    t_py, r_py = best_of(lambda: _kernels_py.swe_sweep(*args), repeats)
    t_cy, r_cy = best_of(lambda: _kernels_cy.swe_sweep(*args), repeats)
    return t_py, t_cy, max_diff(r_py[:2], r_cy[:2])


def bench_thomas(n, repeats):
    sub, diag, sup, rhs = make_tridiag(n, seed=n)
    t_py, r_py = best_of(lambda: _kernels_py.thomas_solve(sub, diag, sup, rhs), repeats)
    t_cy, r_cy = best_of(lambda: _kernels_cy.thomas_solve(sub, diag, sup, rhs), repeats)
    return t_py, t_cy, max_diff(r_py[:1], r_cy[:1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per case (best is kept)")
    args = parser.parse_args()

    if _kernels_cy is None:
        print("compiled extension not built; only the pure-Python backend "
              "is available.  Build it with: pip install -e . --no-build-isolation")
        return 1

    print("%-12s %10s %12s %12s %9s %12s"
          % ("kernel", "cells", "python [s]", "cython [s]", "speedup", "max |diff|"))
    for name, bench in (("swe_sweep", bench_swe_sweep), ("thomas", bench_thomas)):
        for n in (1_000, 10_000, 100_000):
            t_py, t_cy, diff = bench(n, args.repeats)
            print("%-12s %10d %12.6f %12.6f %8.1fx %12g"
                  % (name, n, t_py, t_cy, t_py / t_cy, diff))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
