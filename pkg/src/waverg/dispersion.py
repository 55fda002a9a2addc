"""Dispersion relations and their flow under renormalization layers.

One coarse-graining step maps omega to
omega'(k) = omega(k/2) omega(k/2 + pi) / omega(pi)^2; the harmonic family
sqrt(m^2 + sin^2(k/2)) is closed under this flow with m -> 2 sqrt(m^2 + m^4)
(up to overall scale), and the massless chain is a fixed point of the
pi-normalized shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NegativeMass

_FLOW_GRID = 4096


class Dispersion:
    """Evaluable omega(k), symmetric and nonnegative, positive away from 0."""

    def __call__(self, k):
        raise NotImplementedError

    @property
    def omega_pi(self) -> float:
        return float(self(np.pi))

    def normalized(self, k):
        """omega(k) / omega(pi)."""
        return self(k) / self.omega_pi

    @property
    def gapless(self) -> bool:
        return bool(abs(self(0.0)) < 1e-12)

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class Harmonic(Dispersion):
    """omega(k) = sqrt(m^2 + sin^2(k/2)) for the harmonic chain."""

    m: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise NegativeMass(f"mass must be nonnegative, got {self.m}")

    def __call__(self, k):
        k = np.asarray(k, dtype=np.float64)
        val = np.sqrt(self.m ** 2 + np.sin(k / 2.0) ** 2)
        return float(val) if val.ndim == 0 else val

    def describe(self) -> str:
        return f"harmonic:m={self.m:g}"


@dataclass(frozen=True)
class Flat(Dispersion):
    """Constant dispersion; its ground state is the uncorrelated product state."""

    value: float = 1.0

    def __call__(self, k):
        k = np.asarray(k, dtype=np.float64)
        val = np.full_like(k, self.value)
        return float(val) if val.ndim == 0 else val

    def describe(self) -> str:
        return f"flat:{self.value:g}"


class Tabulated(Dispersion):
    """omega sampled on a grid over [-pi, pi), linearly interpolated, periodic."""

    def __init__(self, ks: np.ndarray, values: np.ndarray, name: str = "tabulated"):
        order = np.argsort(ks)
        self._ks = np.asarray(ks, dtype=np.float64)[order]
        self._values = np.asarray(values, dtype=np.float64)[order]
        self._name = name
        if np.any(self._values < 0):
            raise ValueError("tabulated dispersion must be nonnegative")

    def __call__(self, k):
        k = np.asarray(k, dtype=np.float64)
        kk = np.mod(k + np.pi, 2 * np.pi) - np.pi
        val = np.interp(kk, self._ks, self._values,
                        period=2 * np.pi)
        return float(val) if val.ndim == 0 else val

    def describe(self) -> str:
        return self._name

    @staticmethod
    def from_csv(path: str | Path) -> "Tabulated":
        ks, vals = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    ks.append(float(row[0]))
                except ValueError:
                    continue  # header line
                vals.append(float(row[1]))
        return Tabulated(np.array(ks), np.array(vals), name=f"tabulated:{path}")


class Renormalized(Dispersion):
    """One exact coarse-graining step applied to a base dispersion.

    Evaluation recurses into the base (2^level base calls per point when
    nested); omega(pi) of the base is cached since every evaluation uses it.
    """

    def __init__(self, base: Dispersion):
        self.base = base
        self._base_pi2 = float(base(np.pi)) ** 2
        self.level = getattr(base, "level", 0) + 1

    def __call__(self, k):
        k = np.asarray(k, dtype=np.float64)
        val = np.asarray(self.base(k / 2.0)) \
            * np.asarray(self.base(k / 2.0 + np.pi)) / self._base_pi2
        return float(val) if val.ndim == 0 else val

    def describe(self) -> str:
        return f"renormalized({self.base.describe()})"


def harmonic(m: float) -> Harmonic:
    return Harmonic(m)


def renormalize(d: Dispersion) -> Dispersion:
    return Renormalized(d)


def flow(d: Dispersion, levels: int) -> list[Dispersion]:
    """[omega^(0), ..., omega^(levels)] under repeated renormalization."""
    out = [d]
    for _ in range(levels):
        out.append(Renormalized(out[-1]))
    return out


def mass_flow(m: float, levels: int) -> list[float]:
    """Closed-form m^(l+1) = 2 sqrt(m^(l)^2 + m^(l)^4), starting at m^(0) = m."""
    if m < 0:
        raise NegativeMass(f"mass must be nonnegative, got {m}")
    out = [float(m)]
    for _ in range(levels):
        x = out[-1]
        out.append(2.0 * np.sqrt(x ** 2 + x ** 4))
    return out


def fitted_mass(d: Dispersion, grid: int = _FLOW_GRID) -> float:
    """Least-squares fit of omega(k)^2 to c (m^2 + sin^2(k/2)); returns m.

    Scale-invariant: works on renormalized dispersions whose overall
    normalization differs from the bare harmonic form.
    """
    k = -np.pi + 2 * np.pi * np.arange(grid) / grid
    w2 = np.asarray(d(k)) ** 2
    s2 = np.sin(k / 2.0) ** 2
    design = np.stack([np.ones_like(k), s2], axis=1)
    (alpha, beta), *_ = np.linalg.lstsq(design, w2, rcond=None)
    if beta <= 0:
        return float("inf")  # flat profile, no finite harmonic mass
    return float(np.sqrt(max(alpha, 0.0) / beta))


@dataclass(frozen=True)
class FlowLevel:
    level: int
    omega_pi: float
    omega_max: float
    mass: float | None


@dataclass(frozen=True)
class FlowReport:
    levels: list[FlowLevel]

    @property
    def omega_bound(self) -> float:
        """Max of sup_k omega^(l)(k) over all levels (the Omega estimate)."""
        return max(lv.omega_max for lv in self.levels)


def flow_report(d: Dispersion, levels: int, grid: int = _FLOW_GRID) -> FlowReport:
    k = -np.pi + 2 * np.pi * np.arange(grid) / grid
    fit = isinstance(d, Harmonic)
    out = []
    for l, dl in enumerate(flow(d, levels)):
        vals = np.asarray(dl(k))
        out.append(FlowLevel(
            level=l,
            omega_pi=float(dl(np.pi)),
            omega_max=float(vals.max()),
            mass=fitted_mass(dl, grid) if fit else None,
        ))
    return FlowReport(out)


def parse_dispersion(spec: str) -> Dispersion:
    """CLI specifier: 'harmonic:m=<real>', 'flat:<real>', 'tabulated:<csv path>'."""
    kind, _, rest = spec.partition(":")
    if kind == "harmonic":
        if rest.startswith("m="):
            rest = rest[2:]
        return Harmonic(float(rest or 0.0))
    if kind == "flat":
        return Flat(float(rest or 1.0))
    if kind == "tabulated":
        return Tabulated.from_csv(rest)
    raise ValueError(f"unknown dispersion specifier {spec!r}")
