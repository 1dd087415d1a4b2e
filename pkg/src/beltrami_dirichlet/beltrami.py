"""Principal solutions of ``G_zbar = mu * G_z`` and disk homeomorphisms.

The density ``omega = G_zbar`` solves ``omega = mu + mu * S[omega]`` and is
found by Neumann iteration.  Then ``G = z + C[omega]`` and ``G_z = 1 + S[omega]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientPair
from .conformal import ConformalMapError, DiskMap, JordanBoundary, map_to_disk
from .grid import ComplexField, GridSpec, sample_grid, wirtinger_derivatives
from .transforms import AnalyticFunction, beurling_padded, cauchy_transform, _check_support


class BeltramiError(ValueError):
    pass


class NotConvergedError(BeltramiError):
    def __init__(self, message: str, contraction: float):
        super().__init__(message)
        self.contraction = contraction


@dataclass(frozen=True, eq=False)
class EffectiveCoefficient:
    mutilde: ComplexField
    bound: float

    @classmethod
    def from_field(cls, mutilde: ComplexField) -> "EffectiveCoefficient":
        k = float(np.abs(mutilde.values).max())
        if k >= 1:
            raise BeltramiError(f"effective coefficient reaches modulus {k:.6g} >= 1")
        return cls(mutilde, k)


def _unimodular_ratio(a: np.ndarray) -> np.ndarray:
    """``conj(a) / a`` with 1 wherever ``a == 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a != 0, np.conj(a) / np.where(a != 0, a, 1), 1.0)


def effective_coefficient(pair: CoefficientPair, A: AnalyticFunction | None = None,
                          h: ComplexField | None = None, *,
                          h_z: np.ndarray | None = None) -> EffectiveCoefficient:
    """``mu + nu * conj(h_z)/h_z * conj(A'(h))/A'(h)`` on the mask, 0 outside.

    ``A`` or ``h`` set to ``None`` stands for the identity.  ``h_z`` overrides
    the finite-difference derivative of ``h`` when the caller knows it better.
    """
    mu = pair.mu.values
    if not pair.has_nu:
        return EffectiveCoefficient.from_field(pair.mu)
    factor = np.ones(mu.shape, dtype=complex)
    if h is not None:
        if h_z is None:
            h_z = wirtinger_derivatives(h)[0].values
        factor = factor * _unimodular_ratio(np.asarray(h_z))
    if A is not None:
        w = h.values if h is not None else pair.spec.z
        factor = factor * _unimodular_ratio(A.derivative_values(w))
    mt = np.where(pair.mask, mu + pair.nu.values * factor, 0)
    return EffectiveCoefficient.from_field(ComplexField(pair.spec, mt))


@dataclass(frozen=True, eq=False)
class PrincipalSolution:
    G: ComplexField
    omega: ComplexField
    G_z: ComplexField
    offset: complex  # subtracted so that G(0) = 0
    residuals: tuple  # relative L2 size of each Neumann update
    bound: float

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    @property
    def spec(self) -> GridSpec:
        return self.G.spec

    def contraction(self, start: int = 3) -> float:
        """Geometric rate of the update norms from iteration ``start`` on."""
        return contraction_rate(self.residuals, start)

    def jacobian(self) -> np.ndarray:
        return np.abs(self.G_z.values) ** 2 - np.abs(self.omega.values) ** 2


def contraction_rate(residuals, start: int = 3) -> float:
    r = np.asarray(residuals, dtype=float)[start - 1:]
    r = r[r > 0]
    if r.size < 2:
        return 0.0
    slope = np.polyfit(np.arange(r.size), np.log(r), 1)[0]
    return float(np.exp(slope))


def _value_at_origin(spec: GridSpec, values: np.ndarray) -> complex:
    row, col = spec.index_of(0j)
    if float(row).is_integer() and float(col).is_integer():
        return complex(values[int(row), int(col)])
    return complex(sample_grid(spec, values, np.array([0j]))[0])


def principal_solution(coeff: EffectiveCoefficient, tol: float = 1e-10,
                       max_iter: int = 500) -> PrincipalSolution:
    if coeff.bound >= 1:
        raise BeltramiError("principal solution needs sup |mu| < 1")
    spec = coeff.mutilde.spec
    mu = coeff.mutilde.values
    _check_support(mu)
    n, h = spec.n, spec.step
    omega = mu.copy()
    residuals = []
    S_omega = np.zeros_like(mu)
    if np.any(mu != 0):
        for _ in range(max_iter):
            S_omega = beurling_padded(omega, h)[:n, :n]
            new = mu + mu * S_omega
            size = np.linalg.norm(new)
            delta = np.linalg.norm(new - omega) / size if size else 0.0
            omega = new
            residuals.append(delta)
            if delta <= tol:
                break
        else:
            rate = contraction_rate(residuals)
            raise NotConvergedError(
                f"Neumann iteration did not reach tol={tol:g} in {max_iter} steps "
                f"(contraction estimate {rate:.4f})", rate)
        S_omega = beurling_padded(omega, h)[:n, :n]
    else:
        residuals.append(0.0)
    density = ComplexField(spec, omega)
    raw = spec.z + cauchy_transform(density).values
    offset = _value_at_origin(spec, raw)
    return PrincipalSolution(ComplexField(spec, raw - offset), density,
                             ComplexField(spec, 1.0 + S_omega), offset,
                             tuple(residuals), coeff.bound)


def far_field_exponent(sol: PrincipalSolution) -> float:
    """Fitted decay exponent ``p`` of ``|G(z) - z| ~ |z|**-p`` on the outer frame.

    Uses the untranslated solution, which is the one normalised at infinity.
    """
    spec = sol.spec
    z = spec.z
    tail = np.abs(sol.G.values + sol.offset - z)
    frame = np.zeros(z.shape, dtype=bool)
    frame[[0, 1, -2, -1], :] = True
    frame[:, [0, 1, -2, -1]] = True
    r = np.abs(z - spec.center)[frame]
    t = tail[frame]
    keep = t > 0
    slope = np.polyfit(np.log(r[keep]), np.log(t[keep]), 1)[0]
    return float(-slope)


def equation_residual_G(sol: PrincipalSolution, coeff: EffectiveCoefficient) -> float:
    """Relative L2 residual of ``G_zbar - mu G_z`` by finite differences, interior nodes."""
    gz, gzb = wirtinger_derivatives(sol.G)
    r = gzb.values - coeff.mutilde.values * gz.values
    inner = (slice(2, -2), slice(2, -2))
    return float(np.linalg.norm(r[inner]) / np.linalg.norm(gz.values[inner]))


# --- disk homeomorphisms -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiskHomeomorphism:
    """``h = Psi o G`` on the domain mask (0 elsewhere), ``Psi: G(D) -> disk``."""

    h: ComplexField
    h_z: np.ndarray
    h_zbar: np.ndarray
    mask: np.ndarray
    image_map: DiskMap
    boundary_angles: np.ndarray

    @property
    def spec(self) -> GridSpec:
        return self.h.spec


def disk_homeomorphism(sol: PrincipalSolution, domain: JordanBoundary,
                       marked_index: int = 0, mask: np.ndarray | None = None) -> DiskHomeomorphism:
    spec = sol.spec
    image = sample_grid(spec, sol.G.values, domain.vertices)
    try:
        psi = map_to_disk(JordanBoundary(image), "marked_point", marked_index)
    except ConformalMapError as exc:
        raise BeltramiError(f"image of the boundary under G is not a Jordan curve: {exc}") from exc
    if mask is None:
        mask = domain.mask(spec)
    Gm = sol.G.values[mask]
    w, dpsi = psi.evaluate(Gm, with_derivative=True)
    # nodes whose G-image falls a hair outside the image polygon
    big = np.abs(w) > 1
    w[big] /= np.abs(w[big])
    hv = np.zeros(mask.shape, dtype=complex)
    hz = np.zeros(mask.shape, dtype=complex)
    hzb = np.zeros(mask.shape, dtype=complex)
    hv[mask] = w
    hz[mask] = dpsi * sol.G_z.values[mask]
    hzb[mask] = dpsi * sol.omega.values[mask]
    return DiskHomeomorphism(ComplexField(spec, hv), hz, hzb, np.asarray(mask, dtype=bool),
                             psi, psi.angles.copy())


def orientation_fraction(values: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of grid cells inside ``mask`` whose image has positive signed area."""
    a = values[:-1, :-1]
    b = values[:-1, 1:]
    c = values[1:, 1:]
    d = values[1:, :-1]
    quad = np.stack([a, b, c, d])
    area = 0.5 * np.sum((quad.real * np.roll(quad.imag, -1, axis=0)
                         - np.roll(quad.real, -1, axis=0) * quad.imag), axis=0)
    cells = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, 1:] & mask[1:, :-1]
    if not cells.any():
        return 1.0
    return float(np.mean(area[cells] > 0))
