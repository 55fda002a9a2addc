"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times ``quadrature_profile`` (Toeplitz covariance fill) and ``refine_once``
(cascade refinement sweep) on production-sized inputs.  Both code paths are
imported directly from ``waverg._kernels`` so they can be compared inside a
single process; the public dispatch still honours ``WAVERG_DISABLE_NUMBA``.

Run with::

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from waverg._kernels import (HAVE_NUMBA, _quadrature_profile_np,
                             _refine_once_py)

if HAVE_NUMBA:
    from waverg._kernels import _quadrature_profile_nb, _refine_once_nb


def timeit(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_quadrature(repeats):
    rng = np.random.default_rng(0)
    n, m = 1 << 16, 2048
    kgrid = -np.pi + 2.0 * np.pi * np.arange(n) / n
    integrand = 1.0 / np.abs(2.0 * np.sin(kgrid / 2.0) + 1e-3)
    offsets = np.arange(m, dtype=np.float64)
    del rng
    rows = [("quadrature_profile (n=%d, offsets=%d)" % (n, m),
             timeit(_quadrature_profile_np, integrand, kgrid, offsets,
                    repeats=repeats),
             timeit(_quadrature_profile_nb, integrand, kgrid, offsets,
                    repeats=repeats) if HAVE_NUMBA else None)]
    if HAVE_NUMBA:
        a = _quadrature_profile_np(integrand, kgrid, offsets)
        b = _quadrature_profile_nb(integrand, kgrid, offsets)
        assert np.max(np.abs(a - b)) < 1e-10, "kernel paths disagree"
    return rows


def bench_refine(repeats):
    rng = np.random.default_rng(1)
    taps = rng.standard_normal(20)
    taps *= np.sqrt(2.0) / taps.sum()
    level = 14
    values = rng.standard_normal(20 * (1 << level) + 1)

    def sweep_np():
        _refine_once_py(values, taps, 9 * (1 << level), 1 << level)

    def sweep_nb():
        _refine_once_nb(values, taps, 9 * (1 << level), 1 << level)

    rows = [("refine_once (%d samples, %d taps)" % (values.size, taps.size),
             timeit(sweep_np, repeats=repeats),
             timeit(sweep_nb, repeats=repeats) if HAVE_NUMBA else None)]
    if HAVE_NUMBA:
        a = _refine_once_py(values, taps, 9 * (1 << level), 1 << level)
        b = _refine_once_nb(values, taps, 9 * (1 << level), 1 << level)
        assert np.max(np.abs(a - b)) < 1e-12, "kernel paths disagree"
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if not HAVE_NUMBA:
        print("numba unavailable or disabled: timing numpy fallback only")

    rows = bench_quadrature(args.repeats) + bench_refine(args.repeats)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
        else:
            print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  "
                  f"{t_nb * 1e3:>8.2f}ms  {t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
