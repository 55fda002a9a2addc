"""Multi-layer renormalization stacks, MERA covariances, and error bounds.

A stack carries one filter pair and one squeeze factor sqrt(omega_l(pi)) per
layer; the composed lattice maps R_g (scaled by the squeezes) and
R_h (scaled by their inverses) are symplectic partners, and the MERA
ground-state approximation has covariance blocks

    gamma_q = (1/2) R_h^T R_h,    gamma_p = (1/2) R_g^T R_g.

The exact oracle evaluates the translation-invariant ground-state covariance
gamma_p(k) = omega/2, gamma_q(k) = 1/(2 omega) by periodic quadrature with
Richardson extrapolation; for gapless dispersions the q-block exists only in
the regulated form gamma_q[n,m] - gamma_q[n,n].  The rigorous error bound is
delta_p <= D^2 (C 2^{-L/2} + 3 eps D log2(C/eps)) with C = 4 B^2 M^{3/2}
Omega, and 2x that expression times ||gamma_q (delta_n - delta_m)|| for the
regulated q entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import quadrature_profile
from .design import DesignParams, DesignReport, design_pair, epsilon_of
from .dispersion import Dispersion, fitted_mass, flow, flow_report
from .errors import GaplessUnregulated, OutOfHypothesis, WavergError
from .filters import FilterPair, decomposition_map, multi_layer_map
from .continuum import cascade

REDESIGN = "redesign"


def fixed_after(l_star: int) -> str:
    """Strategy token: design layers 0..l_star, reuse layer l_star's pair after."""
    return f"fixed_after:{l_star}"


def _parse_strategy(strategy: str, L_layers: int) -> int:
    """Return the first reused layer index (L_layers means 'never reuse')."""
    if strategy in (REDESIGN, "redesign_each_layer"):
        return L_layers
    if strategy.startswith("fixed_after"):
        l_star = int(strategy[len("fixed_after"):].strip(":()"))
        if l_star < 0:
            raise ValueError("fixed_after layer must be >= 0")
        return l_star
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True, eq=False)
class LayerStack:
    """Filter pairs with per-layer squeeze factors sqrt(omega_l(pi))."""

    pairs: tuple
    squeezes: tuple
    base_dispersion: Dispersion
    strategy: str = REDESIGN
    epsilons: tuple = ()
    reports: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "squeezes", tuple(float(s) for s in self.squeezes))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "reports", tuple(self.reports))
        if len(self.pairs) != len(self.squeezes):
            raise ValueError("one squeeze factor per layer required")
        if any(s <= 0 for s in self.squeezes):
            raise ValueError("squeeze factors must be positive")

    @property
    def depth(self) -> int:
        return len(self.pairs)

    @property
    def max_support(self) -> int:
        return max(p.support_length() for p in self.pairs)

    def level_dispersions(self) -> list[Dispersion]:
        return flow(self.base_dispersion, self.depth - 1)

    def fitted_masses(self) -> list[float]:
        return [fitted_mass(d) for d in self.level_dispersions()]


def build_stack(d: Dispersion, params: DesignParams, L_layers: int,
                strategy: str = REDESIGN) -> LayerStack:
    """Design (or reuse) one filter pair per renormalization level.

    Layer l is designed against omega_l / omega_l(pi); its squeeze factor is
    sqrt(omega_l(pi)).  Design failures are re-raised with the failing layer
    recorded on the exception.
    """
    if L_layers < 1:
        raise ValueError("L_layers must be >= 1")
    reuse_from = _parse_strategy(strategy, L_layers)
    levels = flow(d, L_layers - 1)
    pairs, squeezes, epsilons, reports = [], [], [], []
    for l, dl in enumerate(levels):
        squeezes.append(np.sqrt(dl.omega_pi))
        if l > reuse_from:
            pair, report = pairs[reuse_from], reports[reuse_from]
        else:
            try:
                pair, report = design_pair(dl, params)
            except WavergError as err:
                err.layer = l
                raise
        pairs.append(pair)
        reports.append(report)
        epsilons.append(epsilon_of(pair, dl))
    return LayerStack(tuple(pairs), tuple(squeezes), d, strategy,
                      tuple(epsilons), tuple(reports))


# ---------------------------------------------------------------------------
# covariance matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CovariancePair:
    """q/p covariance blocks on Z_N; regulated q stores entries minus diagonal."""

    N: int
    q_block: np.ndarray
    p_block: np.ndarray
    regulated: bool = False
    quad_error: float | None = None

    def __post_init__(self):
        for name in ("q_block", "p_block"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, m)

    def uncertainty_min(self) -> float:
        """Smallest eigenvalue of q_block p_block; >= 1/4 for a valid state."""
        if self.regulated:
            raise GaplessUnregulated(
                "uncertainty spectrum is undefined for a regulated q-block")
        return float(np.min(np.real(
            np.linalg.eigvals(self.q_block @ self.p_block))))


def mera_covariance(stack: LayerStack, N: int) -> CovariancePair:
    """gamma_q = R_h^T R_h / 2 and gamma_p = R_g^T R_g / 2 on Z_N."""
    scales_g = list(stack.squeezes)
    scales_h = [1.0 / s for s in stack.squeezes]
    R_g = multi_layer_map(stack.pairs, "g", N, scales=scales_g).matrix
    R_h = multi_layer_map(stack.pairs, "h", N, scales=scales_h).matrix
    q = 0.5 * (R_h.T @ R_h)
    p = 0.5 * (R_g.T @ R_g)
    return CovariancePair(N, 0.5 * (q + q.T), 0.5 * (p + p.T))


def _profile(integrand_of_k, offsets: np.ndarray, quad_points: int,
             drop_k0: bool = False) -> tuple[np.ndarray, float]:
    """Richardson-extrapolated (1/2pi) integral of f(k) cos(k d) per offset.

    Returns (values, certified error estimate).  ``drop_k0`` zeroes the k = 0
    sample, used for combinations whose true integrand vanishes there.
    """
    results = []
    for n in (quad_points, 2 * quad_points):
        k = -np.pi + 2.0 * np.pi * np.arange(n) / n
        f = np.asarray(integrand_of_k(k), dtype=np.float64)
        if drop_k0:
            f[np.abs(k) < 1e-15] = 0.0
        results.append(quadrature_profile(f, k, offsets.astype(np.float64)))
    coarse, fine = results
    extrapolated = fine + (fine - coarse) / 3.0  # cancel the h^2 term
    return extrapolated, float(np.max(np.abs(fine - coarse)) / 3.0)


def exact_p_profile(d: Dispersion, offsets: np.ndarray,
                    quad_points: int = 1 << 16) -> tuple[np.ndarray, float]:
    """gamma_p at lattice offsets: (1/2pi) integral of (omega/2) cos(k d)."""
    return _profile(lambda k: np.asarray(d(k)) / 2.0, offsets, quad_points)


def exact_q_profile(d: Dispersion, offsets: np.ndarray,
                    quad_points: int = 1 << 16,
                    regulated: bool | None = None) -> tuple[np.ndarray, float]:
    """gamma_q profile; regulated entries use (cos(k d) - 1) / (2 omega)."""
    if regulated is None:
        regulated = d.gapless
    if d.gapless and not regulated:
        raise GaplessUnregulated(
            "plain q covariance diverges for a gapless dispersion; "
            "request the regulated profile")

    def inv2w(k):
        w = np.asarray(d(k))
        with np.errstate(divide="ignore"):
            return np.where(w > 0, 1.0 / (2.0 * np.maximum(w, 1e-300)), 0.0)

    if not regulated:
        return _profile(inv2w, offsets, quad_points)
    vals, err = _profile(inv2w, np.concatenate(([0.0], offsets)),
                         quad_points, drop_k0=True)
    return vals[1:] - vals[0], 2.0 * err


def exact_covariance(d: Dispersion, N: int, quad_points: int = 1 << 16,
                     regulated: bool | None = None) -> CovariancePair:
    """Toeplitz ground-state covariance of the infinite chain, rows 0..N-1."""
    if regulated is None:
        regulated = d.gapless
    offsets = np.arange(N)
    p_prof, p_err = exact_p_profile(d, offsets, quad_points)
    q_prof, q_err = exact_q_profile(d, offsets, quad_points, regulated)
    idx = np.abs(np.subtract.outer(np.arange(N), np.arange(N)))
    return CovariancePair(N, q_prof[idx], p_prof[idx], regulated=regulated,
                          quad_error=max(p_err, q_err))


def q_difference_norm(d: Dispersion, delta: int,
                      quad_points: int = 1 << 16) -> float:
    """l2 norm of gamma_q (delta_n - delta_m) with |n - m| = delta.

    By Parseval (1/2pi convention):
    norm^2 = (1/2pi) integral (1 - cos(k delta)) / (2 omega(k)^2) dk,
    finite for gapless omega ~ |k| when delta != 0.
    """
    if delta == 0:
        raise ValueError("delta must be nonzero")

    def integrand(k):
        w2 = np.asarray(d(k)) ** 2
        top = 1.0 - np.cos(k * delta)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(w2 > 0, top / (2.0 * np.maximum(w2, 1e-300)), 0.0)
        return out

    vals, _ = _profile(integrand, np.array([0.0]), quad_points, drop_k0=True)
    return float(np.sqrt(max(vals[0], 0.0)))


def ring_covariance(d: Dispersion, N: int) -> CovariancePair:
    """Exact ground-state covariance of the N-site periodic chain.

    Discrete momentum sum instead of quadrature; requires a gapped dispersion
    (the k = 0 mode has no normalizable ground state otherwise).  Matches the
    infinite-chain oracle up to corrections exponentially small in N times
    the gap.
    """
    if d.gapless:
        raise GaplessUnregulated(
            "periodic-chain covariance requires a gapped dispersion")
    k = 2.0 * np.pi * np.arange(N) / N
    w = np.asarray(d(k))
    delta = np.arange(N)
    cosmat = np.cos(np.outer(delta, k))
    q_prof = cosmat @ (1.0 / (2.0 * w)) / N
    p_prof = cosmat @ (w / 2.0) / N
    idx = np.abs(np.subtract.outer(delta, delta))
    idx = np.minimum(idx, N - idx)
    return CovariancePair(N, q_prof[idx], p_prof[idx])


def wavelet_channel_deviation(stack: LayerStack, N: int) -> list[float]:
    """Per-level deviation of the disentangled wavelet channel from the vacuum.

    For each level l, the exact periodic-chain ground state of the level-l
    dispersion is analyzed by that level's single layer; with a perfect filter
    relation the squeezed wavelet block is exactly I/2, so the deviation
    measures the layer's disentangling quality in isolation.  For a massive
    chain the renormalized dispersion flattens with depth, so the deviations
    decrease.  (Measuring the blocks through the composed stack instead
    plateaus at the finest layer's relation defect, which contaminates every
    deeper channel; the per-level measurement isolates the flattening trend.)
    """
    out = []
    for pair, dl in zip(stack.pairs, stack.level_dispersions()):
        exact = ring_covariance(dl, N)
        w_g = decomposition_map(pair, "g", N).matrix
        w_h = decomposition_map(pair, "h", N).matrix
        s2 = dl.omega_pi
        half = N // 2
        q_b = s2 * (w_g @ exact.q_block @ w_g.T)[half:, half:]
        p_b = (w_h @ exact.p_block @ w_h.T)[half:, half:] / s2
        eye = 0.5 * np.eye(half)
        out.append(max(float(np.max(np.abs(q_b - eye))),
                       float(np.max(np.abs(p_b - eye)))))
    return out


# ---------------------------------------------------------------------------
# theorem bound and error report
# ---------------------------------------------------------------------------

def theorem_bound(B: float, D: float, M: int, Omega: float, eps: float,
                  L_layers: int) -> tuple[float, float]:
    """(bound_p, bound_q_prefactor) of the rigorous approximation theorem.

    bound_p = D^2 (C 2^{-L/2} + 3 eps D log2(C/eps)), C = 4 B^2 M^{3/2} Omega;
    the q prefactor is twice bound_p and multiplies
    ||gamma_q (delta_n - delta_m)|| per regulated entry.  eps = 0 is accepted
    as the limit where the second term vanishes.
    """
    problems = []
    if not eps >= 0:
        problems.append(f"eps = {eps} < 0")
    if eps > 1:
        problems.append(f"eps = {eps} > 1")
    if D < 1:
        problems.append(f"D = {D} < 1")
    if Omega < 1:
        problems.append(f"Omega = {Omega} < 1")
    C = 4.0 * B ** 2 * M ** 1.5 * Omega
    if eps > 0 and C / eps < 2:
        problems.append(f"C/eps = {C / eps:.3g} < 2")
    if problems:
        raise OutOfHypothesis("; ".join(problems))
    tail = 0.0 if eps == 0 else 3.0 * eps * D * np.log2(C / eps)
    bound_p = D ** 2 * (C * 2.0 ** (-L_layers / 2.0) + tail)
    return float(bound_p), float(2.0 * bound_p)


def stack_operator_bound(stack: LayerStack, N: int = 512) -> float:
    """Max spectral norm over contiguous sub-stacks, both channels.

    Computed at a moderate lattice size: the maps are circulant up to the
    layer structure, so the norm is essentially size-independent once the
    lattice exceeds the filter support.  This is an estimate of the theorem's
    sub-stack constant, not an exact evaluation at the working size.
    """
    worst = 0.0
    for l0 in range(stack.depth):
        for l1 in range(l0 + 1, stack.depth + 1):
            pairs = stack.pairs[l0:l1]
            sg = list(stack.squeezes[l0:l1])
            sh = [1.0 / s for s in sg]
            for channel, scales in (("g", sg), ("h", sh)):
                m = multi_layer_map(pairs, channel, N, scales=scales)
                worst = max(worst, m.norm())
    return worst


def stack_amplitude_bound(stack: LayerStack, J: int = 10) -> float:
    """Max sup-norm of the scaling functions of all filters in the stack."""
    worst = 0.0
    seen = set()
    for pair in stack.pairs:
        for a_s in (pair.g_s, pair.h_s):
            key = (a_s.offset, a_s.coeffs.tobytes())
            if key in seen:
                continue
            seen.add(key)
            a0 = float(np.real(a_s(0.0)))
            phi = cascade(a_s.scale(np.sqrt(2.0) / a0), J)
            worst = max(worst, float(np.max(np.abs(phi.values))))
    return worst


@dataclass(frozen=True, eq=False)
class ErrorReport:
    delta_p: float
    delta_q: float | None
    delta_q_regulated: dict
    bound_p: float
    bound_q: float
    bound_q_entries: dict
    q_norms: dict
    constants: dict

    def dominated(self) -> bool:
        """True when every measured deviation sits below its bound."""
        ok = self.delta_p <= self.bound_p
        if self.delta_q is not None:
            ok = ok and self.delta_q <= self.bound_q
        for key, val in self.delta_q_regulated.items():
            ok = ok and val <= self.bound_q_entries[key]
        return bool(ok)

    def to_json(self) -> dict:
        return {
            "delta_p": self.delta_p,
            "delta_q": self.delta_q,
            "delta_q_regulated": {f"{n},{m}": v for (n, m), v
                                  in self.delta_q_regulated.items()},
            "bound_p": self.bound_p,
            "bound_q": self.bound_q,
            "bound_q_entries": {f"{n},{m}": v for (n, m), v
                                in self.bound_q_entries.items()},
            "q_difference_norms": {f"{n},{m}": v for (n, m), v
                                   in self.q_norms.items()},
            "constants": self.constants,
            "dominated": self.dominated(),
        }

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2))


def error_report(stack: LayerStack, N: int, quad_points: int = 1 << 16,
                 pairs_to_check: tuple = ((0, 1), (0, 4), (0, 16))) -> ErrorReport:
    """Measure MERA-vs-exact deviations in the bulk and the theorem bounds.

    delta_p is the max entrywise deviation over the centered window
    |n|, |m| <= N/4 (wrap-around kept out of the comparison); regulated q
    deviations are evaluated at the requested (n, m) pairs.
    """
    d = stack.base_dispersion
    L = stack.depth
    mera = mera_covariance(stack, N)
    half = N // 4
    window = np.arange(-half, half + 1)
    rows = window % N
    offsets = np.arange(2 * half + 1)
    p_prof, _ = exact_p_profile(d, offsets, quad_points)
    dist = np.abs(np.subtract.outer(window, window))
    exact_p_win = p_prof[dist]
    mera_p_win = mera.p_block[np.ix_(rows, rows)]
    delta_p = float(np.max(np.abs(exact_p_win - mera_p_win)))

    delta_q = None
    gapless = d.gapless
    if not gapless:
        q_prof, _ = exact_q_profile(d, offsets, quad_points, regulated=False)
        exact_q_win = q_prof[dist]
        mera_q_win = mera.q_block[np.ix_(rows, rows)]
        delta_q = float(np.max(np.abs(exact_q_win - mera_q_win)))

    deltas = sorted({abs(n - m) for n, m in pairs_to_check if n != m})
    reg_prof = {}
    if deltas:
        vals, _ = exact_q_profile(d, np.array(deltas, dtype=float),
                                  quad_points, regulated=True)
        reg_prof = dict(zip(deltas, vals))
    delta_q_reg = {}
    for n, m in pairs_to_check:
        if n == m:
            continue
        mera_reg = mera.q_block[n % N, m % N] - mera.q_block[n % N, n % N]
        delta_q_reg[(n, m)] = float(abs(reg_prof[abs(n - m)] - mera_reg))

    B = stack_amplitude_bound(stack)
    D = stack_operator_bound(stack, N=min(N, 512))
    M = stack.max_support
    Omega = flow_report(d, L - 1).omega_bound
    eps = max(stack.epsilons) if stack.epsilons else max(
        epsilon_of(p, dl) for p, dl in zip(stack.pairs,
                                           stack.level_dispersions()))
    bound_p, q_prefactor = theorem_bound(B, D, M, Omega, eps, L)
    q_norms = {(n, m): q_difference_norm(d, abs(n - m), quad_points)
               for n, m in pairs_to_check if n != m}
    bound_q_entries = {key: q_prefactor * val for key, val in q_norms.items()}
    bound_q = max(bound_q_entries.values()) if bound_q_entries else q_prefactor
    constants = {"B": B, "D": D, "M": M, "Omega": Omega, "epsilon": eps,
                 "C": 4.0 * B ** 2 * M ** 1.5 * Omega, "L_layers": L, "N": N}
    return ErrorReport(delta_p, delta_q, delta_q_reg, bound_p, bound_q,
                       bound_q_entries, q_norms, constants)
