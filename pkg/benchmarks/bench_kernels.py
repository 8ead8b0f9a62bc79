#!/usr/bin/env python3
"""Benchmark the hot kernels: numba backend vs the pure numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Sizes mirror the bundled house scenario (120x90 grid, 270-beam scans).
"""
import argparse
import math
import time

import numpy as np

from pfsim.accel import _numba_impl, _numpy_impl
from pfsim.prediction import rbf_kernel


def timeit(fn, repeat):
    fn()  # warm (JIT compile on the numba side)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def make_cases(rng):
    w, h, res = 120, 90, 0.1
    cells = rng.uniform(0.03, 0.97, (h, w))
    angles = np.linspace(-0.75 * math.pi, 0.75 * math.pi, 270)
    segs = rng.uniform(0.0, 9.0, (60, 4))
    end_x = 6.0 + 4.0 * np.cos(angles)
    end_y = 4.5 + 4.0 * np.sin(angles)
    hits = rng.uniform(size=270) < 0.6

    n = 30
    x = np.sort(rng.uniform(-0.8, 0.0, n))
    y = np.sin(3 * x) + 0.05 * rng.normal(size=n)
    K = rbf_kernel(x, x, 1.0)
    U = np.exp((x - x[-1]) / 0.25) * 1000.0

    def scan_case(impl):
        def run():
            impl.apply_scan(cells.copy(), 6.0, 4.5, end_x, end_y, hits,
                            res, 0.0, 0.0, 0.3, 0.7, 0.03, 0.97)
        return run

    return [
        ("raycast_ranges (270 beams x 60 edges)",
         lambda impl: lambda: impl.raycast_ranges(6.0, 4.5, angles, segs, 10.0)),
        ("apply_scan (270 beams, 120x90 grid)", scan_case),
        ("frontier_field (120x90 grid)",
         lambda impl: lambda: impl.frontier_field(cells, 1.0, 0.65)),
        ("visibility_mask (120 rays)",
         lambda impl: lambda: impl.visibility_mask(cells, 6.0, 4.5, 0.3, 0.5,
                                                   6.0, 0.65, res, 0.0, 0.0, 120)),
        ("supercover_cells (10 m diagonal)",
         lambda impl: lambda: impl.supercover_cells(0.05, 0.05, 9.95, 8.05,
                                                    res, 0.0, 0.0, w, h)),
        ("smo_solve (n=30, C=1000)",
         lambda impl: lambda: impl.smo_solve(K, y, U, 0.01, 1e-6, 200_000)),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    cases = make_cases(rng)
    name_w = max(len(c[0]) for c in cases)
    print(f"{'kernel':<{name_w}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, case in cases:
        t_np = timeit(case(_numpy_impl), args.repeat)
        t_nb = timeit(case(_numba_impl), args.repeat)
        print(f"{name:<{name_w}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
