"""Coefficient pairs (mu, nu), their dilatation, truncation and builtin families.

The phase factor ``z / conj(z)`` is undefined at the origin.  Builtin radial
families use its average over the grid cell centred there, which is 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import ComplexField, GridSpec, RealField

DEGENERATE_GAP = 1e-14
DEFAULT_LEVELS = (2, 4, 8, 16, 32)


class CoefficientError(ValueError):
    pass


def _frozen_mask(mask) -> np.ndarray:
    m = np.array(mask, dtype=bool, copy=True)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class CoefficientPair:
    mu: ComplexField
    nu: ComplexField
    mask: np.ndarray

    def __post_init__(self):
        if self.mu.spec != self.nu.spec:
            raise CoefficientError("mu and nu live on different grids")
        m = _frozen_mask(self.mask)
        if m.shape != self.mu.values.shape:
            raise CoefficientError("mask shape does not match the grid")
        object.__setattr__(self, "mask", m)
        if np.any(self.mu.values[~m] != 0) or np.any(self.nu.values[~m] != 0):
            raise CoefficientError("coefficients must vanish outside the domain mask")
        if np.any(self.modulus_sum > 1.0 + 1e-12):
            raise CoefficientError("|mu| + |nu| exceeds 1")

    @property
    def spec(self) -> GridSpec:
        return self.mu.spec

    @property
    def modulus_sum(self) -> np.ndarray:
        return np.abs(self.mu.values) + np.abs(self.nu.values)

    @property
    def bound(self) -> float:
        """Sup of ``|mu| + |nu|`` over the grid."""
        return float(self.modulus_sum.max())

    @property
    def has_nu(self) -> bool:
        return bool(np.any(self.nu.values != 0))

    @classmethod
    def zero(cls, spec: GridSpec, mask) -> "CoefficientPair":
        z = np.zeros((spec.n, spec.n), dtype=complex)
        return cls(ComplexField(spec, z), ComplexField(spec, z), mask)

    @classmethod
    def from_arrays(cls, spec: GridSpec, mu, nu, mask) -> "CoefficientPair":
        mask = np.asarray(mask, dtype=bool)
        mu = np.where(mask, np.broadcast_to(np.asarray(mu, dtype=complex), mask.shape), 0)
        nu = np.where(mask, np.broadcast_to(np.asarray(nu, dtype=complex), mask.shape), 0)
        return cls(ComplexField(spec, mu), ComplexField(spec, nu), mask)


@dataclass(frozen=True, eq=False)
class DilatationField:
    """``K = (1 + |mu| + |nu|) / (1 - |mu| - |nu|)``; ``inf`` on degenerate nodes."""

    spec: GridSpec
    values: np.ndarray
    degenerate: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "degenerate", _frozen_mask(self.degenerate))

    def as_field(self) -> RealField:
        return RealField(self.spec, self.values)

    @property
    def finite_max(self) -> float:
        fin = self.values[np.isfinite(self.values)]
        return float(fin.max()) if fin.size else float("inf")


def dilatation_from_modulus(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    degenerate = s >= 1.0 - DEGENERATE_GAP
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (1.0 + s) / (1.0 - s)
    return np.where(degenerate, np.inf, K)


def dilatation(pair: CoefficientPair) -> DilatationField:
    s = pair.modulus_sum
    K = np.where(pair.mask, dilatation_from_modulus(s), 1.0)
    degenerate = pair.mask & ~np.isfinite(K)
    return DilatationField(pair.spec, K, degenerate)


def truncate(pair: CoefficientPair, n: float) -> CoefficientPair:
    """Zero both coefficients wherever the dilatation exceeds ``n``."""
    if n < 1:
        raise CoefficientError(f"truncation level must be >= 1, got {n}")
    K = dilatation(pair).values
    cut = K > n
    if not cut.any():
        return pair
    mu = np.where(cut, 0, pair.mu.values)
    nu = np.where(cut, 0, pair.nu.values)
    return CoefficientPair(ComplexField(pair.spec, mu), ComplexField(pair.spec, nu), pair.mask)


@dataclass(frozen=True, eq=False)
class TruncationLadder:
    levels: tuple
    pairs: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
            raise CoefficientError("ladder levels must be strictly increasing and nonempty")
        if len(self.pairs) != len(levels):
            raise CoefficientError("one pair per ladder level is required")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(zip(self.levels, self.pairs))

    def modified_nodes(self, index: int, original: CoefficientPair) -> np.ndarray:
        p = self.pairs[index]
        return (p.mu.values != original.mu.values) | (p.nu.values != original.nu.values)


def build_ladder(pair: CoefficientPair, levels=DEFAULT_LEVELS) -> TruncationLadder:
    levels = tuple(levels)
    return TruncationLadder(levels, tuple(truncate(pair, n) for n in levels))


def geometric_levels(depth: int, first: int = 2) -> tuple:
    return tuple(first * 2 ** k for k in range(depth))


# --- special forms ----------------------------------------------------------

def from_reduced(lam: ComplexField, mask) -> CoefficientPair:
    """Reduced equation: ``mu = nu = lambda / 2``."""
    mask = np.asarray(mask, dtype=bool)
    lam_v = np.where(mask, lam.values, 0)
    if np.any(np.abs(lam_v) >= 1.0):
        raise CoefficientError("|lambda| must stay below 1 on the mask")
    half = ComplexField(lam.spec, lam_v / 2)
    return CoefficientPair(half, half, mask)


def from_phase_form(mu: ComplexField, theta: RealField, mask) -> CoefficientPair:
    """``nu = mu * exp(i theta)``; the dilatation does not depend on ``theta``."""
    mask = np.asarray(mask, dtype=bool)
    mu_v = np.where(mask, mu.values, 0)
    if np.any(2 * np.abs(mu_v) >= 1.0):
        raise CoefficientError("2|mu| must stay below 1 on the mask")
    nu_v = mu_v * np.exp(1j * np.asarray(theta.values, dtype=float))
    return CoefficientPair(ComplexField(mu.spec, mu_v), ComplexField(mu.spec, nu_v), mask)


# --- builtin families ---------------------------------------------------------

def phase_factor(z: np.ndarray) -> np.ndarray:
    """``z / conj(z)`` with the origin cell average (0) at ``z == 0``."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(z != 0, z / np.conj(np.where(z != 0, z, 1)), 0)


def radial_profile(profile: str, scale: float = 1.0):
    """Radial dilatation profile ``K(r)`` on ``0 < r < 1``."""
    if scale <= 0:
        raise CoefficientError("profile scale must be positive")
    if profile == "log":
        return lambda r: 1.0 + scale * np.log(1.0 / r)
    if profile == "loglog":
        return lambda r: 1.0 + scale * np.log(np.log(np.e / r))
    if profile == "exp":
        def K(r):
            with np.errstate(over="ignore"):
                return np.exp(scale / r)
        return K
    raise CoefficientError(f"unknown radial profile {profile!r}")


def _radial_mu(z, K_of_r):
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = K_of_r(np.where(r > 0, r, 1.0))
        k = np.where(np.isfinite(K), (K - 1.0) / (K + 1.0), 1.0)
    return -k * phase_factor(z)


FAMILIES = ("zero", "constant", "radial-power", "radial-log-K", "phase-form", "reduced-constant")


def builtin_family(name: str, params: dict | None, spec: GridSpec, mask) -> CoefficientPair:
    params = dict(params or {})
    mask = np.asarray(mask, dtype=bool)
    z = spec.z
    if name == "zero":
        return CoefficientPair.zero(spec, mask)
    if name == "constant":
        mu = complex(params.get("mu", 0))
        nu = complex(params.get("nu", 0))
        if abs(mu) + abs(nu) >= 1:
            raise CoefficientError("constant family needs |mu| + |nu| < 1")
        return CoefficientPair.from_arrays(spec, mu, nu, mask)
    if name == "radial-power":
        a = float(params.get("a", 0.5))
        if a <= 0:
            raise CoefficientError("radial-power exponent must be positive")
        mu = (a - 1) / (a + 1) * phase_factor(z)
        return CoefficientPair.from_arrays(spec, mu, 0, mask)
    if name == "radial-log-K":
        prof = radial_profile(params.get("profile", "log"), float(params.get("scale", 1.0)))
        return CoefficientPair.from_arrays(spec, _radial_mu(z, prof), 0, mask & (np.abs(z) < 1))
    if name == "phase-form":
        m = float(params.get("modulus", 0.2))
        if not 0 <= m < 0.5:
            raise CoefficientError("phase-form modulus must lie in [0, 1/2)")
        mu = ComplexField(spec, m * phase_factor(z))
        theta = RealField(spec, np.angle(z))
        return from_phase_form(mu, theta, mask)
    if name == "reduced-constant":
        lam = complex(params.get("lambda", 0.5))
        return from_reduced(ComplexField(spec, np.full(z.shape, lam)), mask)
    raise CoefficientError(f"unknown coefficient family {name!r}; expected one of {FAMILIES}")
