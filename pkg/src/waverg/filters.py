"""Finitely supported real filters and periodic-lattice decomposition maps.

Fourier convention throughout the package: a(k) = sum_n a[n] exp(-i k n).
Under this convention the time-domain wavelet rule
g_w[n] = (-1)^(1-n) h_s[1-n] coincides with the frequency-domain rule
g_w(k) = exp(-ik) conj(h_s(k + pi)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LatticeTooSmall

ROOT2 = float(np.sqrt(2.0))

#: default uniform evaluation grid on [-pi, pi)
DEFAULT_GRID = 4096


def kgrid(n: int = DEFAULT_GRID) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Real filter with finite support starting at ``offset``.

    Stored coefficients are canonically trimmed: leading and trailing entries
    are nonzero (the all-zero filter keeps a single 0 tap at offset 0).
    """

    offset: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        nz = np.flatnonzero(c)
        if nz.size == 0:
            object.__setattr__(self, "offset", 0)
            object.__setattr__(self, "coeffs", np.zeros(1))
        else:
            lo, hi = nz[0], nz[-1] + 1
            object.__setattr__(self, "offset", int(self.offset) + int(lo))
            object.__setattr__(self, "coeffs", c[lo:hi].copy())
        self.coeffs.setflags(write=False)

    # -- basic queries -----------------------------------------------------
    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def support(self) -> tuple[int, int]:
        """(first, last) index carrying a coefficient, inclusive."""
        return self.offset, self.offset + len(self.coeffs) - 1

    def __getitem__(self, n: int) -> float:
        i = n - self.offset
        if 0 <= i < len(self.coeffs):
            return float(self.coeffs[i])
        return 0.0

    def indices(self) -> np.ndarray:
        return self.offset + np.arange(len(self.coeffs))

    # -- algebra -----------------------------------------------------------
    def __call__(self, k):
        """Fourier transform sum_n a[n] exp(-i k n); accepts scalars or arrays."""
        k = np.asarray(k, dtype=np.float64)
        phase = np.exp(-1j * np.multiply.outer(k, self.indices()))
        val = phase @ self.coeffs
        return complex(val) if val.ndim == 0 else val

    def convolve(self, other: "FirFilter") -> "FirFilter":
        return FirFilter(self.offset + other.offset,
                         np.convolve(self.coeffs, other.coeffs))

    def correlate(self, other: "FirFilter") -> "FirFilter":
        """c[m] = sum_j self[j] other[j - m]  (Fourier: self(k) other(-k))."""
        c = np.convolve(self.coeffs, other.coeffs[::-1])
        off = self.offset - (other.offset + len(other.coeffs) - 1)
        return FirFilter(off, c)

    def reflect(self) -> "FirFilter":
        """n -> -n; Fourier: a(-k)."""
        return FirFilter(-(self.offset + len(self.coeffs) - 1), self.coeffs[::-1])

    def shift(self, t: int) -> "FirFilter":
        return FirFilter(self.offset + t, self.coeffs)

    def scale(self, c: float) -> "FirFilter":
        return FirFilter(self.offset, c * self.coeffs)

    def __mul__(self, c: float) -> "FirFilter":
        return self.scale(float(c))

    __rmul__ = __mul__

    def __add__(self, other: "FirFilter") -> "FirFilter":
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.coeffs), other.offset + len(other.coeffs))
        c = np.zeros(hi - lo)
        c[self.offset - lo:self.offset - lo + len(self.coeffs)] += self.coeffs
        c[other.offset - lo:other.offset - lo + len(other.coeffs)] += other.coeffs
        return FirFilter(lo, c)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        a, b = self.support
        if a != -b:
            return False
        return bool(np.max(np.abs(self.coeffs - self.coeffs[::-1])) <= tol)

    @staticmethod
    def delta(n: int = 0, value: float = 1.0) -> "FirFilter":
        return FirFilter(n, np.array([value]))


def fourier_eval(a: FirFilter, k) -> complex:
    """Module-level alias for FirFilter.__call__."""
    return a(k)


HAAR_SCALING = FirFilter(0, np.array([1.0, 1.0]) / ROOT2)


def wavelet_from_scaling(dual_scaling: FirFilter) -> FirFilter:
    """a_w[n] = (-1)^(1-n) b_s[1-n] from the dual scaling filter."""
    lo, hi = dual_scaling.support
    n0, n1 = 1 - hi, 1 - lo
    n = np.arange(n0, n1 + 1)
    coeffs = np.array([(-1.0) ** ((1 - int(m)) % 2) * dual_scaling[1 - int(m)]
                       for m in n])
    return FirFilter(n0, coeffs)


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Biorthogonal pair (g, h) of scaling filters plus derived wavelets.

    ``pr_residual`` is the perfect-reconstruction defect recorded at
    construction; ``halfwidth`` M is the smallest window half-size so that
    both scaling filters fit in a length-2M interval.
    """

    g_s: FirFilter
    h_s: FirFilter
    g_w: FirFilter = field(init=False)
    h_w: FirFilter = field(init=False)
    pr_residual: float = field(init=False)
    halfwidth: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g_w", wavelet_from_scaling(self.h_s))
        object.__setattr__(self, "h_w", wavelet_from_scaling(self.g_s))
        object.__setattr__(self, "pr_residual", pr_residual(self))
        lo = min(self.g_s.support[0], self.h_s.support[0])
        hi = max(self.g_s.support[1], self.h_s.support[1])
        object.__setattr__(self, "halfwidth", max(1, (hi - lo + 1 + 1) // 2))

    def swapped(self) -> "FilterPair":
        """Exchange the roles of g and h (still a valid pair)."""
        return FilterPair(self.h_s, self.g_s)

    def support_length(self) -> int:
        lo = min(self.g_s.support[0], self.h_s.support[0])
        hi = max(self.g_s.support[1], self.h_s.support[1])
        return hi - lo + 1

    # -- serialization (wavelet parts always re-derived, never stored) -----
    def to_json(self, name: str = "", meta: dict | None = None) -> dict:
        d = {
            "name": name,
            "g_s": {"offset": self.g_s.offset, "coeffs": self.g_s.coeffs.tolist()},
            "h_s": {"offset": self.h_s.offset, "coeffs": self.h_s.coeffs.tolist()},
            "meta": dict(meta or {}),
        }
        d["meta"].setdefault("pr_residual", self.pr_residual)
        return d

    @staticmethod
    def from_json(d: dict) -> "FilterPair":
        g = FirFilter(int(d["g_s"]["offset"]), np.asarray(d["g_s"]["coeffs"]))
        h = FirFilter(int(d["h_s"]["offset"]), np.asarray(d["h_s"]["coeffs"]))
        return FilterPair(g, h)

    def save(self, path: str | Path, name: str = "", meta: dict | None = None):
        Path(path).write_text(json.dumps(self.to_json(name, meta), indent=2))

    @staticmethod
    def load(path: str | Path) -> "FilterPair":
        return FilterPair.from_json(json.loads(Path(path).read_text()))


def haar_pair() -> FilterPair:
    return FilterPair(HAAR_SCALING, HAAR_SCALING)


def derive_wavelet(g_s: FirFilter, h_s: FirFilter) -> FilterPair:
    """Assemble a FilterPair; wavelets follow the fixed modulation rule."""
    return FilterPair(g_s, h_s)


def pr_residual(pair: FilterPair, grid_size: int | None = None) -> float:
    """Perfect-reconstruction defect, max of the Fourier and time-domain forms.

    Fourier: sup_k |g(k) conj(h(k)) + g(k+pi) conj(h(k+pi)) - 2|.
    Time domain: max_n |sum_l g[2n+l] h[l] - delta_0[n]|.
    """
    g, h = pair.g_s, pair.h_s
    if grid_size is None:
        grid_size = max(DEFAULT_GRID, 4 * (pair.support_length()))
    k = kgrid(grid_size)
    lhs = g(k) * np.conj(h(k)) + g(k + np.pi) * np.conj(h(k + np.pi))
    fr = float(np.max(np.abs(lhs - 2.0)))
    # time domain: c[m] = sum_j g[j] h[j - m] = sum_l g[m + l] h[l]
    c = g.correlate(h)
    lo, hi = c.support
    tr = 0.0
    for m in range(lo, hi + 1):
        if m % 2 == 0:
            want = 1.0 if m == 0 else 0.0
            tr = max(tr, abs(c[m] - want))
    if 0 < lo or 0 > hi:
        tr = max(tr, 1.0)  # delta_0 entirely missing
    return max(fr, tr)


@dataclass(frozen=True)
class LatticeMap:
    """Dense linear map on a periodic lattice of even size N.

    For decomposition maps rows 0..N/2-1 are the low-pass channel and rows
    N/2..N-1 the high-pass channel.
    """

    N: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        object.__setattr__(self, "matrix", m)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def _place_rows(filt: FirFilter, N: int, rows: int) -> np.ndarray:
    """rows x N block with row n = filter placed at position 2n, circularly."""
    out = np.zeros((rows, N))
    idx = filt.indices()
    for n in range(rows):
        out[n, (2 * n + idx) % N] += filt.coeffs
    return out


def decomposition_map(pair: FilterPair, channel: str, N: int) -> LatticeMap:
    """Single-layer analysis map W_a on Z_N: low[n] = sum_l a_s[l] f[2n+l]."""
    if channel == "g":
        a_s, a_w = pair.g_s, pair.g_w
    elif channel == "h":
        a_s, a_w = pair.h_s, pair.h_w
    else:
        raise ValueError(f"channel must be 'g' or 'h', got {channel!r}")
    support = pair.support_length()
    if N % 2 != 0 or N < 2 * support:
        raise LatticeTooSmall(N, support)
    m = np.vstack([_place_rows(a_s, N, N // 2), _place_rows(a_w, N, N // 2)])
    return LatticeMap(N, m)


def _decomposition_matrix(pair: FilterPair, channel: str, N: int) -> np.ndarray:
    """Circulant analysis block without the size guard.

    Wrap-around keeps lattice biorthogonality exact (the time-domain
    perfect-reconstruction delta aliases only onto multiples of N), so deep
    layers of a multi-layer stack may use lattices smaller than the support.
    """
    a_s, a_w = (pair.g_s, pair.g_w) if channel == "g" else (pair.h_s, pair.h_w)
    return np.vstack([_place_rows(a_s, N, N // 2), _place_rows(a_w, N, N // 2)])


def multi_layer_map(stack, channel: str, N: int,
                    scales: list[float] | None = None) -> LatticeMap:
    """Compose analysis layers, halving the lattice each time.

    Output block ordering: (scaling at the deepest level, wavelet at the
    deepest level, ..., wavelet at level 1).  ``scales`` optionally multiplies
    each layer map by a scalar (squeeze factors).
    """
    stack = list(stack)
    L = len(stack)
    if L == 0:
        raise ValueError("empty layer stack")
    if N % (2 ** L) != 0:
        raise ValueError(f"N = {N} not divisible by 2^{L}")
    if channel not in ("g", "h"):
        raise ValueError(f"channel must be 'g' or 'h', got {channel!r}")
    support = max(p.support_length() for p in stack)
    if N < 2 * support:
        raise LatticeTooSmall(N, support)
    total = np.eye(N)
    size = N
    for l, pair in enumerate(stack):
        # size guard applies at the finest lattice only; coarser layers may
        # wrap (see _decomposition_matrix)
        w = _decomposition_matrix(pair, channel, size)
        if scales is not None:
            w = scales[l] * w
        # the layer acts as w ⊕ identity on the already-produced wavelet rows
        total[:size, :] = w @ total[:size, :]
        size //= 2
    return LatticeMap(N, total)
