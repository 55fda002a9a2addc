"""Hot numeric kernels, numba-compiled when available.

Two inner loops dominate runtime at production sizes: filling Toeplitz
covariance profiles by quadrature (grid points x lattice offsets) and the
dyadic refinement sweeps of the cascade algorithm.  Both have a numba
``@njit`` implementation and a pure-numpy fallback.  Selection:

* numba missing                                 -> numpy fallback
* ``WAVERG_DISABLE_NUMBA=1`` in the environment -> numpy fallback
* otherwise                                     -> numba

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("WAVERG_DISABLE_NUMBA", "") not in ("", "0")

try:  # pragma: no cover - import guard
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


# ---------------------------------------------------------------------------
# Toeplitz covariance profile by periodic trapezoid quadrature
# ---------------------------------------------------------------------------

def _quadrature_profile_np(integrand, kgrid, offsets):
    n = kgrid.size
    out = np.empty(offsets.size)
    chunk = max(1, (1 << 22) // n)  # cap the cos() scratch matrix at ~32 MB
    for i0 in range(0, offsets.size, chunk):
        offs = offsets[i0:i0 + chunk]
        out[i0:i0 + chunk] = np.cos(np.outer(offs, kgrid)) @ integrand / n
    return out


@njit(cache=True)
def _quadrature_profile_nb(integrand, kgrid, offsets):  # pragma: no cover
    n = kgrid.size
    out = np.empty(offsets.size)
    for i in range(offsets.size):
        d = offsets[i]
        acc = 0.0
        for j in range(n):
            acc += integrand[j] * math.cos(kgrid[j] * d)
        out[i] = acc / n
    return out


def quadrature_profile(integrand: np.ndarray, kgrid: np.ndarray,
                       offsets: np.ndarray) -> np.ndarray:
    """(1/2pi) * integral over [-pi, pi) of integrand(k) cos(k d) dk per offset d.

    The grid must be uniform over a full period, so the trapezoid rule equals
    the plain Riemann sum used here (spectrally accurate for smooth periodic
    integrands).
    """
    integrand = np.ascontiguousarray(integrand, dtype=np.float64)
    kgrid = np.ascontiguousarray(kgrid, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    if HAVE_NUMBA:
        return _quadrature_profile_nb(integrand, kgrid, offsets)
    return _quadrature_profile_np(integrand, kgrid, offsets)


# ---------------------------------------------------------------------------
# Cascade refinement sweep
# ---------------------------------------------------------------------------

def _refine_once_py(values, taps, shift0, step):
    npts = 2 * (values.size - 1) + 1
    out = np.zeros(npts)
    out[0::2] = values
    idx = np.arange(1, npts, 2)
    acc = np.zeros(idx.size)
    for t in range(taps.size):
        src = idx + shift0 - t * step
        ok = (src >= 0) & (src < values.size)
        acc[ok] += taps[t] * values[src[ok]]
    out[1::2] = math.sqrt(2.0) * acc
    return out


@njit(cache=True)
def _refine_once_nb(values, taps, shift0, step):  # pragma: no cover
    npts = 2 * (values.size - 1) + 1
    out = np.zeros(npts)
    for i in range(values.size):
        out[2 * i] = values[i]
    root2 = math.sqrt(2.0)
    for i in range(1, npts, 2):
        acc = 0.0
        for t in range(taps.size):
            src = i + shift0 - t * step
            if 0 <= src < values.size:
                acc += taps[t] * values[src]
        out[i] = root2 * acc
    return out


def refine_once(values: np.ndarray, taps: np.ndarray, tap_offset: int,
                x0: int, level: int) -> np.ndarray:
    """One dyadic refinement sweep of phi(x) = sqrt(2) sum_n a[n] phi(2x - n).

    ``values`` samples phi at x0 + i/2^level over the support; the result
    samples the half-spacing grid.  Even slots copy; for odd slot i the point
    2x - n lands back on the input grid at index i + (x0 - n) * 2^level.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    step = 1 << level
    shift0 = (x0 - tap_offset) * step
    if HAVE_NUMBA:
        return _refine_once_nb(values, taps, shift0, step)
    return _refine_once_py(values, taps, shift0, step)
