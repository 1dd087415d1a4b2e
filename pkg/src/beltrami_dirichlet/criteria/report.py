"""Run the whole criteria battery over sample points and aggregate."""
from __future__ import annotations

import numpy as np

from ..coefficients import CoefficientPair, DilatationField, dilatation
from ..grid import RealField
from .oscillation import fmo_test
from .phi import PhiCondition, exponential_integrability, phi_condition_tests, phi_integral_budget
from .radial import circle_mean, lehto_divergence_test, log_scale_tests
from .verdicts import (DEFAULT_THRESHOLDS, INCONCLUSIVE, NOT_APPLICABLE, SATISFIED, VIOLATED,
                       CriteriaVerdict, Thresholds, as_sampler, combine)

CRITERIA = ("fmo", "nu_only", "lehto", "log_scale", "log_scale_weighted", "phi",
            "exp_integrability")
EPS_MAX = 0.5


def default_sample_points(spec=None, mask=None, density: int = 2) -> np.ndarray:
    """Interior lattice plus eight boundary points of the domain."""
    rays = np.exp(1j * np.pi * np.arange(8) / 4)
    if spec is None:
        lattice = 0.5 * np.array([0, 1, -1, 1j, -1j])
        return np.concatenate([lattice, rays])
    m = np.ones((spec.n, spec.n), bool) if mask is None else np.asarray(mask, bool)
    z = spec.z
    g = spec.half_width * np.arange(-density, density + 1) / (density + 1)
    lattice = (spec.center + g[None, :] + 1j * g[:, None]).ravel()
    row, col = spec.index_of(lattice)
    lattice = lattice[m[np.rint(row).astype(int), np.rint(col).astype(int)]]
    edge = []
    inside = z[m]
    rel = inside - spec.center
    for d in rays:
        # outermost mask node within a narrow cone around the ray
        along = np.real(rel * np.conj(d))
        near = np.abs(np.imag(rel * np.conj(d))) <= spec.step
        if near.any():
            edge.append(inside[near][np.argmax(np.where(near, along, -np.inf)[near])])
    return np.concatenate([lattice, np.array(edge, dtype=complex)])


def _radius_room(su, z0: complex) -> float:
    if su.spec is None or su.filled:
        return EPS_MAX
    spec = su.spec
    room = spec.half_width - max(abs(z0.real - spec.center.real), abs(z0.imag - spec.center.imag))
    return min(EPS_MAX, 0.9 * room)


def _source(pair_or_K):
    """(K source, nu-only source or None, grid field or None)."""
    if isinstance(pair_or_K, CoefficientPair):
        Kf = dilatation(pair_or_K)
        field = RealField(Kf.spec, Kf.values)
        nu_only = None
        if not np.any(pair_or_K.mu.values):
            nu_only = field
        return field, nu_only, field
    if isinstance(pair_or_K, (DilatationField, RealField)):
        field = RealField(pair_or_K.spec, pair_or_K.values)
        return field, None, field
    K = getattr(pair_or_K, "K", pair_or_K)
    if not callable(K):
        raise TypeError("criteria_report needs a CoefficientPair, a dilatation field or a callable K")
    return K, None, None


def criteria_report(pair_or_K, cond: PhiCondition | None = None, points=None,
                    th: Thresholds = DEFAULT_THRESHOLDS, mask=None, dominant=None,
                    nu_only_mean: bool | None = None) -> dict:
    """Verdicts of every criterion at every sample point, plus the aggregate.

    ``dominant`` replaces ``K`` in the FMO test by a majorant ``Q >= K``.
    Overall: satisfied when one criterion holds at all points, violated
    when every applicable criterion fails somewhere, otherwise inconclusive.
    """
    K_src, nu_src, field = _source(pair_or_K)
    if isinstance(pair_or_K, CoefficientPair) and mask is None:
        mask = pair_or_K.mask
    if nu_only_mean is False:
        nu_src = None
    # off the domain the coefficients vanish, so K = 1 beyond the grid
    su = as_sampler(K_src, fill=1.0) if field is not None else as_sampler(K_src)
    q_src = su if dominant is None else as_sampler(dominant)
    if dominant is not None and field is not None and isinstance(dominant, (RealField, DilatationField)):
        m = np.ones(field.values.shape, bool) if mask is None else mask
        if np.any(np.asarray(dominant.values)[m] < field.values[m] - 1e-12):
            raise ValueError("dominant field must majorize K on the mask")
    if points is None:
        points = default_sample_points(su.spec, mask)
    points = np.atleast_1d(np.asarray(points, dtype=complex))

    per_test = {name: [] for name in CRITERIA}
    phi_global = None
    grid_budget = None
    if cond is not None:
        phi_global = phi_condition_tests(cond, th)
        if field is not None:
            grid_budget = phi_integral_budget(field, cond, mask=mask, th=th)
    grid_exp = exponential_integrability(field, mask=mask, th=th) if field is not None else None

    for z0 in points:
        z0 = complex(z0)
        room = _radius_room(su, z0)
        floor = su.sweep_floor(z0, room)
        per_test["fmo"].append(fmo_test(q_src, z0, eps_max=room, th=th))
        if nu_src is not None:
            v = fmo_test(su, z0, eps_max=room, th=th)
            per_test["nu_only"].append(CriteriaVerdict("nu_only", v.verdict, v.evidence, z0))
        else:
            per_test["nu_only"].append(CriteriaVerdict(
                "nu_only", NOT_APPLICABLE, {"reason": "needs mu = 0"}, z0))
        profile = lambda r, z0=z0: circle_mean(su, z0, r, 256)
        per_test["lehto"].append(lehto_divergence_test(profile, delta=room, r_min=floor,
                                                       th=th, z0=z0))
        for v in log_scale_tests(su, z0, eps0=room, th=th, r_min=floor):
            per_test[v.test].append(v)
        if field is None:
            per_test["exp_integrability"].append(
                exponential_integrability(K_src, z0=z0, delta=room, th=th))
        else:
            per_test["exp_integrability"].append(
                CriteriaVerdict("exp_integrability", grid_exp.verdict, grid_exp.evidence, z0))
        if cond is None:
            per_test["phi"].append(CriteriaVerdict("phi", NOT_APPLICABLE, {"reason": "no Phi"}, z0))
        else:
            budget = grid_budget or phi_integral_budget(K_src, cond, z0=z0, delta=room, th=th)
            per_test["phi"].append(_phi_verdict(phi_global["overall"], budget, z0))

    tests = {}
    for name, vs in per_test.items():
        tests[name] = {"verdict": combine([v.verdict for v in vs]),
                       "points": [v.to_dict() for v in vs]}
    applicable = {n: t["verdict"] for n, t in tests.items() if t["verdict"] != NOT_APPLICABLE}
    satisfied_by = sorted(n for n, v in applicable.items() if v == SATISFIED)
    if satisfied_by:
        overall = SATISFIED
    elif applicable and all(v == VIOLATED for v in applicable.values()):
        overall = VIOLATED
    else:
        overall = INCONCLUSIVE
    out = {"overall": overall, "satisfied_by": satisfied_by, "thresholds": th.to_dict(),
           "points": [[p.real, p.imag] for p in points], "tests": tests}
    if phi_global is not None:
        out["phi_conditions"] = {
            "phi": cond.to_dict(),
            "overall": phi_global["overall"], "agree": phi_global["agree"],
            "resolution_failure": phi_global["resolution_failure"],
            "conditions": {k: v.to_dict() for k, v in phi_global["conditions"].items()}}
    return out


def _phi_verdict(conditions: str, budget: CriteriaVerdict, z0) -> CriteriaVerdict:
    """Needs both a divergence condition on Phi and a finite budget."""
    if conditions == SATISFIED and budget.verdict == SATISFIED:
        verdict = SATISFIED
    elif VIOLATED in (conditions, budget.verdict):
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return CriteriaVerdict("phi", verdict, {"conditions": conditions, "budget": budget.to_dict()}, z0)


def headline(report: dict, names=("fmo", "lehto", "exp_integrability")) -> tuple:
    return tuple(report["tests"][n]["verdict"] for n in names)

