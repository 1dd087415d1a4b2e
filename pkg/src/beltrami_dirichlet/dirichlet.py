"""Dirichlet problem ``Re f = phi`` on the boundary for degenerate Beltrami equations.

Each ladder level solves a uniformly elliptic problem by a damped fixed point
on the effective coefficient: solve for the principal solution ``G``, map
``G(D)`` to the disk to get ``h``, recover the analytic factor ``A`` from the
boundary datum, rebuild the effective coefficient from ``(A, h)``, relax.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import binary_erosion

from .beltrami import (BeltramiError, DiskHomeomorphism, EffectiveCoefficient, NotConvergedError,
                       disk_homeomorphism, effective_coefficient, orientation_fraction,
                       principal_solution)
from .coefficients import CoefficientPair, DEFAULT_LEVELS, dilatation, truncate
from .conformal import JordanBoundary
from .grid import ComplexField, GridSpec, chordal_distance, wirtinger_derivatives
from .transforms import AnalyticFunction, BoundaryFunction, schwarz_integral

log = logging.getLogger(__name__)

CONSTANT_PERTURBATION = 1e-8


class ProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    boundary: JordanBoundary
    phi: BoundaryFunction  # samples at the boundary vertices
    pair: CoefficientPair
    marked_index: int = 0

    def __post_init__(self):
        if self.phi.m != self.boundary.m:
            raise ProblemError("boundary datum needs one sample per boundary vertex")
        if not self.phi.nonconstant:
            raise ProblemError("boundary datum must not be constant")
        K = dilatation(self.pair)
        inside = self.pair.mask
        if not inside.any() or not np.isfinite(K.values[inside]).any():
            raise ProblemError("dilatation is infinite on the whole domain")
        finite = K.values[inside & np.isfinite(K.values)]
        if not np.isfinite(finite.sum()):
            raise ProblemError("dilatation is not integrable over the domain")

    @property
    def spec(self) -> GridSpec:
        return self.pair.spec

    @classmethod
    def on_boundary(cls, boundary: JordanBoundary, phi_func, pair: CoefficientPair,
                    marked_index: int = 0) -> "DirichletProblem":
        """Build the datum by evaluating ``phi_func`` at the boundary vertices."""
        samples = np.asarray(phi_func(boundary.vertices), dtype=float)
        return cls(boundary, BoundaryFunction(samples, boundary.vertices), pair, marked_index)


def pull_to_circle(phi: BoundaryFunction, angles: np.ndarray, m: int) -> BoundaryFunction:
    """Resample vertex data known at circle ``angles`` onto ``m`` equispaced angles."""
    t = np.mod(angles, 2 * np.pi)
    order = np.argsort(t, kind="stable")
    t = t[order]
    y = np.asarray(phi.samples)[order]
    keep = np.append(np.diff(t) > 0, True)
    t, y = t[keep], y[keep]
    tp = np.append(t, t[0] + 2 * np.pi)
    yp = np.append(y, y[0])
    spline = CubicSpline(tp, yp, bc_type="periodic")
    theta = 2 * np.pi * np.arange(m) / m
    return BoundaryFunction(spline(np.where(theta < t[0], theta + 2 * np.pi, theta)))


@dataclass(frozen=True, eq=False)
class LevelState:
    """One consistent iterate: f = A o h, with the coefficient that produced h."""

    f: ComplexField
    h: DiskHomeomorphism
    A: AnalyticFunction
    mutilde: EffectiveCoefficient
    boundary_error: float


@dataclass
class LevelRecord:
    level: float
    iterations: int = 0
    converged: bool = False
    changes: list = field(default_factory=list)
    neumann_iterations: list = field(default_factory=list)
    equation_residual: float = float("nan")
    boundary_error: float = float("nan")
    saturated: bool = False

    def to_dict(self) -> dict:
        return {"level": self.level, "iterations": self.iterations, "converged": self.converged,
                "sup_change_history": [float(c) for c in self.changes],
                "neumann_iterations": list(self.neumann_iterations),
                "equation_residual": float(self.equation_residual),
                "boundary_sup_error": float(self.boundary_error), "saturated": self.saturated}


@dataclass(frozen=True)
class SolverSettings:
    tol_outer: float = 1e-6
    max_outer: int = 60
    relaxation: float = 0.5
    neumann_tol: float = 1e-10
    neumann_max_iter: int = 2000
    circle_samples: int = 1024

    def __post_init__(self):
        if not 0 < self.relaxation <= 1:
            raise ProblemError("relaxation must lie in (0, 1]")
        if self.tol_outer <= 0 or self.neumann_tol <= 0:
            raise ProblemError("tolerances must be positive")
        if self.circle_samples < 64 or self.circle_samples % 2:
            raise ProblemError("circle_samples must be even and >= 64")


def _assemble(problem: DirichletProblem, pair: CoefficientPair, coeff: EffectiveCoefficient,
              settings: SolverSettings) -> tuple[LevelState, int]:
    sol = principal_solution(coeff, settings.neumann_tol, settings.neumann_max_iter)
    hom = disk_homeomorphism(sol, problem.boundary, problem.marked_index, pair.mask)
    phi_circle = pull_to_circle(problem.phi, hom.boundary_angles, settings.circle_samples)
    A = schwarz_integral(phi_circle)
    if A.is_constant:
        A = A.perturbed(CONSTANT_PERTURBATION)
    fv = np.where(pair.mask, A.values(hom.h.values), 0)
    f = ComplexField(pair.spec, fv)
    on_circle = A.values(np.exp(1j * hom.boundary_angles))
    berr = float(np.max(np.abs(on_circle.real - problem.phi.samples)))
    return LevelState(f, hom, A, coeff, berr), sol.iterations


def _next_coefficient(pair: CoefficientPair, state: LevelState) -> EffectiveCoefficient:
    hom = state.h
    return effective_coefficient(pair, state.A, hom.h, h_z=hom.h_z)


def solve_bounded(problem: DirichletProblem, pair: CoefficientPair | None = None,
                  warm: LevelState | None = None, settings: SolverSettings = SolverSettings(),
                  level: float = float("inf")) -> tuple[LevelState, LevelRecord]:
    """Damped fixed point for one uniformly elliptic pair (default: the problem's own).

    Relaxation acts on the effective coefficient, so every returned iterate is
    a consistent triple ``(f, h, A)``.
    """
    pair = problem.pair if pair is None else pair
    if pair.bound >= 1:
        raise ProblemError("solve_bounded needs a truncated pair with |mu| + |nu| < 1")
    record = LevelRecord(level)
    if warm is None:
        coeff = effective_coefficient(pair)
    else:
        coeff = _next_coefficient(pair, warm)
    rho = settings.relaxation
    state, its = _assemble(problem, pair, coeff, settings)
    record.neumann_iterations.append(its)
    record.iterations = 1
    mask = pair.mask
    for _ in range(settings.max_outer - 1):
        target = _next_coefficient(pair, state)
        if np.array_equal(target.mutilde.values, coeff.mutilde.values):
            record.changes.append(0.0)
            record.converged = True
            break
        mixed = (1 - rho) * coeff.mutilde.values + rho * target.mutilde.values
        coeff = EffectiveCoefficient.from_field(ComplexField(pair.spec, mixed))
        new, its = _assemble(problem, pair, coeff, settings)
        record.neumann_iterations.append(its)
        record.iterations += 1
        change = float(np.max(np.abs(new.h.h.values - state.h.h.values)[mask]))
        record.changes.append(change)
        log.debug("level %s outer %d: sup change %.3e", level, record.iterations, change)
        state = new
        if change <= settings.tol_outer:
            record.converged = True
            break
    if settings.max_outer == 1:
        record.converged = not pair.has_nu
    record.boundary_error = state.boundary_error
    record.equation_residual = equation_residual(state.f, pair)["l2_rel"]
    return state, record


# --- residuals and diagnostics -------------------------------------------------

def interior_nodes(mask: np.ndarray) -> np.ndarray:
    """Mask nodes whose finite-difference stencil stays inside the mask."""
    return binary_erosion(mask, structure=np.ones((3, 3), dtype=bool), border_value=0)


def equation_residual(f: ComplexField, pair: CoefficientPair, cutoff: float = np.inf) -> dict:
    """Residual ``f_zbar - mu f_z - nu conj(f_z)`` by finite differences.

    Relative L2 over interior mask nodes with dilatation <= ``cutoff``, scaled
    by the larger of ``||f_z||`` and ``||f_zbar||``; sup over the same nodes.
    """
    fz, fzb = wirtinger_derivatives(f)
    fz, fzb = fz.values, fzb.values
    r = fzb - pair.mu.values * fz - pair.nu.values * np.conj(fz)
    K = dilatation(pair).values
    nodes = interior_nodes(pair.mask) & (K <= cutoff)
    if not nodes.any():
        return {"l2_rel": float("nan"), "sup_masked": float("nan"), "nodes": 0}
    scale = max(np.linalg.norm(fz[nodes]), np.linalg.norm(fzb[nodes]))
    l2 = float(np.linalg.norm(r[nodes]) / scale) if scale > 0 else 0.0
    return {"l2_rel": l2, "sup_masked": float(np.max(np.abs(r[nodes]))), "nodes": int(nodes.sum())}


def regularity_diagnostics(f: ComplexField, h: ComplexField, mask: np.ndarray) -> dict:
    """Grid surrogates for a nonvanishing Jacobian, discreteness and openness of ``h``."""
    hz, hzb = wirtinger_derivatives(h)
    J = np.abs(hz.values) ** 2 - np.abs(hzb.values) ** 2
    nodes = interior_nodes(mask)
    frac = float(np.mean(J[nodes] > 0)) if nodes.any() else 1.0
    vals = h.values
    a, b, d = vals[:-1, :-1], vals[:-1, 1:], vals[1:, :-1]
    cell_area = np.abs(((b - a) * np.conj(d - a)).imag)
    cells = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, :-1] & mask[1:, 1:]
    scale = float(np.mean(cell_area[cells])) if cells.any() else 0.0
    nondeg = float(np.mean(cell_area[cells] > 1e-12 * scale)) if cells.any() and scale > 0 else 1.0
    return {"jacobian_positive_fraction": frac,
            "discreteness_proxy": nondeg,
            "openness_proxy": orientation_fraction(vals, mask),
            "flagged": frac < 0.999}


def spherical_sup_distance(a: ComplexField, b: ComplexField, mask: np.ndarray) -> float:
    return float(np.max(chordal_distance(a.values[mask], b.values[mask])))


# --- ladder ------------------------------------------------------------------

@dataclass
class SolveReport:
    levels: list
    records: list
    cross_level_distances: list
    ladder_converged: bool
    state: LevelState
    final_residual: dict
    regularity: dict
    problem: DirichletProblem
    tol_ladder: float

    @property
    def converged(self) -> bool:
        return self.ladder_converged and bool(self.records) and self.records[-1].converged

    @property
    def f(self) -> ComplexField:
        return self.state.f

    @property
    def h(self) -> ComplexField:
        return self.state.h.h

    @property
    def A(self) -> AnalyticFunction:
        return self.state.A

    @property
    def imag_f_origin(self) -> float:
        return float(np.imag(self.state.A.values(np.array([0j]))[0]))

    def to_dict(self) -> dict:
        return {
            "levels": [float(v) for v in self.levels],
            "level_records": [r.to_dict() for r in self.records],
            "cross_level_spherical_distance": [float(d) for d in self.cross_level_distances],
            "tol_ladder": self.tol_ladder,
            "ladder_converged": self.ladder_converged,
            "converged": self.converged,
            "equation_residual": self.final_residual,
            "boundary_sup_error": self.state.boundary_error,
            "imag_f_origin": self.imag_f_origin,
            "regularity": self.regularity,
            "taylor_degree": self.state.A.degree,
        }


def solve(problem: DirichletProblem, levels=DEFAULT_LEVELS, tol_ladder: float = 1e-3,
          settings: SolverSettings = SolverSettings()) -> SolveReport:
    levels = list(levels)
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ProblemError("ladder levels must be strictly increasing")
    records, distances = [], []
    state = None
    prev_pair = None
    mask = problem.pair.mask
    for n in levels:
        pair = truncate(problem.pair, n)
        if prev_pair is not None and _same_pair(pair, prev_pair):
            rec = LevelRecord(n, 0, records[-1].converged, [], [],
                              records[-1].equation_residual, records[-1].boundary_error, True)
            records.append(rec)
            distances.append(0.0)
            continue
        new, rec = solve_bounded(problem, pair, state, settings, n)
        records.append(rec)
        if state is not None:
            distances.append(spherical_sup_distance(new.h.h, state.h.h, mask))
        state, prev_pair = new, pair
        log.info("level %s: %d outer iterations, converged=%s", n, rec.iterations, rec.converged)
    ladder_ok = bool(distances) and distances[-1] < tol_ladder
    if len(levels) == 1:
        ladder_ok = records[0].converged
    final = equation_residual(state.f, problem.pair, cutoff=levels[-1])
    reg = regularity_diagnostics(state.f, state.h.h, mask)
    return SolveReport(levels, records, distances, ladder_ok, state, final, reg, problem, tol_ladder)


def _same_pair(a: CoefficientPair, b: CoefficientPair) -> bool:
    return (np.array_equal(a.mu.values, b.mu.values)
            and np.array_equal(a.nu.values, b.nu.values))
