"""Closed-form cases and brute-force reference computations.

Nothing here calls the solver; test expectations come from these evaluators.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .coefficients import CoefficientPair, phase_factor, radial_profile
from .grid import ComplexField, GridSpec
from .transforms import cell_average_inverse_square

BRUTE_FORCE_MAX = 48


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact ``f = A o h`` with the coefficients it satisfies.

    ``mu`` and ``nu`` are callables of ``z``; ``f_z`` is the exact derivative
    used to build two-characteristic splits.
    """

    description: str
    f: Callable
    h: Callable
    A: Callable
    mu: Callable
    nu: Callable
    f_z: Callable
    phi: Callable  # boundary datum as a function of boundary points
    dilatation: float | None = None

    def pair(self, spec: GridSpec, mask) -> CoefficientPair:
        z = spec.z
        return CoefficientPair.from_arrays(spec, self.mu(z), self.nu(z), mask)


def _radial_power(z, p):
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, r ** p, 0.0)


def radial_stretch_case(K: float = 2.0, degree: int = 2) -> ManufacturedCase:
    """``h = z |z|**(1/K - 1)``, ``A(w) = w**degree``, ``nu = 0``."""
    if K < 1 or degree < 1:
        raise OracleError("radial stretch needs K >= 1 and degree >= 1")
    a = 1.0 / K
    k = (a - 1) / (a + 1)

    def h(z):
        z = np.asarray(z, dtype=complex)
        return z * _radial_power(z, a - 1) if a != 1 else z

    def f_z(z):
        z = np.asarray(z, dtype=complex)
        hz = (a + 1) / 2 * _radial_power(z, a - 1) if a != 1 else np.ones(z.shape)
        return degree * h(z) ** (degree - 1) * hz

    return ManufacturedCase(
        description=f"radial stretch K={K:g}, A(w)=w^{degree}",
        f=lambda z: h(z) ** degree,
        h=h,
        A=lambda w: np.asarray(w) ** degree,
        mu=lambda z: k * phase_factor(z),
        nu=lambda z: np.zeros(np.shape(z), dtype=complex),
        f_z=f_z,
        phi=lambda v: np.cos(degree * np.angle(v)),
        dilatation=K,
    )


def two_characteristics_split(case: ManufacturedCase, t: float) -> ManufacturedCase:
    """Move a share ``t`` of ``mu`` into the conjugate-linear term."""
    if not 0 <= t <= 1:
        raise OracleError("split parameter must lie in [0, 1]")

    def rotation(z):
        fz = case.f_z(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(fz != 0, fz / np.conj(np.where(fz != 0, fz, 1)), 0)

    return ManufacturedCase(
        description=f"{case.description}, split t={t:g}",
        f=case.f, h=case.h, A=case.A,
        mu=lambda z: (1 - t) * case.mu(z),
        nu=lambda z: t * case.mu(z) * rotation(z),
        f_z=case.f_z, phi=case.phi, dilatation=case.dilatation,
    )


# --- degenerate families ----------------------------------------------------

EXPECTED_VERDICTS = {
    "log": {"fmo": "satisfied", "lehto": "satisfied", "exp_integrability": "satisfied"},
    "loglog": {"fmo": "satisfied", "lehto": "satisfied", "exp_integrability": "satisfied"},
    "exp": {"fmo": "violated", "lehto": "violated", "exp_integrability": "violated"},
}


@dataclass(frozen=True)
class DegenerateCase:
    profile: str
    K: Callable  # dilatation as a function of z
    mu: Callable
    expected: dict

    def pair(self, spec: GridSpec, mask) -> CoefficientPair:
        z = spec.z
        return CoefficientPair.from_arrays(spec, self.mu(z), 0, np.asarray(mask) & (np.abs(z) < 1))


def degenerate_radial_case(profile: str, scale: float = 1.0) -> DegenerateCase:
    if profile not in EXPECTED_VERDICTS:
        raise OracleError(f"unknown profile {profile!r}")
    prof = radial_profile(profile, scale)

    def K(z):
        r = np.abs(np.asarray(z, dtype=complex))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = prof(np.where(r > 0, r, np.nan))
        return np.where(r > 0, np.where(r < 1, val, 1.0), np.inf)

    def mu(z):
        Kz = K(z)
        with np.errstate(invalid="ignore"):
            k = np.where(np.isfinite(Kz), (Kz - 1) / (Kz + 1), 1.0)
        return -k * phase_factor(z)

    return DegenerateCase(profile, K, mu, dict(EXPECTED_VERDICTS[profile]))


def exact_log_family_map(z, scale: float = 1.0):
    """Radial homeomorphism of the disk with dilatation ``1 + scale log(1/|z|)``."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (1 + scale * np.log(1 / r)) ** (-1 / scale)
        return np.where(r > 0, z / r * rho, 0)


# --- brute force ------------------------------------------------------------

def brute_force_beurling(density: ComplexField) -> ComplexField:
    """Direct O(n^4) principal-value sum with the cell-averaged ``-1/(pi z^2)``."""
    spec = density.spec
    n = spec.n
    if n > BRUTE_FORCE_MAX:
        raise OracleError(f"brute force limited to {BRUTE_FORCE_MAX}^2 grids")
    h = spec.step
    z = spec.z.ravel()
    w = density.values.ravel()
    out = np.empty(z.size, dtype=complex)
    for k in range(z.size):
        kern = cell_average_inverse_square(z[k] - z, h)
        out[k] = -(h * h / np.pi) * np.sum(kern * w)
    return ComplexField(spec, out.reshape(n, n))


def theodorsen_correspondence(radius: Callable, m: int = 4096, tol: float = 1e-15,
                              max_iter: int = 500):
    """Boundary correspondence of a starlike domain ``r = radius(theta)``.

    Returns ``(t, theta)``: the disk angle ``t`` maps to the polar angle
    ``theta(t)`` under the conformal map with positive derivative at 0.
    """
    t = 2 * np.pi * np.arange(m) / m
    k = np.fft.fftfreq(m, 1.0 / m)
    conj_mult = -1j * np.sign(k)
    theta = t.copy()
    for _ in range(max_iter):
        g = np.log(radius(theta))
        new = t + np.real(np.fft.ifft(conj_mult * np.fft.fft(g)))
        done = np.max(np.abs(new - theta)) < tol
        theta = new
        if done:
            return t, theta
    raise OracleError("Theodorsen iteration did not converge")


def ellipse_radius(a: float, b: float):
    return lambda th: a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2)


def theodorsen_disk_angles(radius: Callable, polar_angles, m: int = 4096) -> np.ndarray:
    """Disk angles of boundary points given by their polar angles (periodic spline inverse)."""
    from scipy.interpolate import CubicSpline

    t, theta = theodorsen_correspondence(radius, m)
    inverse = CubicSpline(np.append(theta, theta[0] + 2 * np.pi), np.append(t, 2 * np.pi))
    pol = np.mod(np.asarray(polar_angles, dtype=float) - theta[0], 2 * np.pi) + theta[0]
    return inverse(pol)


def radial_stretch_principal(z, K: float = 2.0) -> np.ndarray:
    """Principal solution for the radial stretch on the unit disk: identity outside."""
    z = np.asarray(z, dtype=complex)
    inside = np.abs(z) < 1
    return np.where(inside, radial_stretch_case(K, 1).h(z), z)


def export_case(case: ManufacturedCase, outdir, n: int = 256, m: int = 512,
                levels=(4, 8)) -> Path:
    """Write a manufactured disk case as field files plus a solve config.

    The config points at ``mu.cfld``, ``nu.cfld`` and ``phi.csv`` (one datum
    per boundary vertex), so the regression corpus runs through the CLI
    without the builtin generators.
    """
    from .conformal import JordanBoundary
    from .fieldio import write_field

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    boundary = JordanBoundary.circle(m)
    spec = boundary.grid(n)
    pair = case.pair(spec, boundary.mask(spec))
    write_field(pair.mu, outdir / "mu.cfld")
    write_field(pair.nu, outdir / "nu.cfld")
    phi = case.phi(boundary.vertices)
    np.savetxt(outdir / "phi.csv", phi, delimiter=",", header="phi", comments="")
    config = {
        "schema": 1,
        "description": case.description,
        "domain": {"type": "disk", "radius": 1.0, "vertices": m},
        "coefficients": {"files": {"mu": "mu.cfld", "nu": "nu.cfld"}},
        "boundary_datum": {"samples_csv": "phi.csv"},
        "solver": {"grid": n, "levels": list(levels)},
        "output": {"dir": "out"},
    }
    path = outdir / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n")
    return path
