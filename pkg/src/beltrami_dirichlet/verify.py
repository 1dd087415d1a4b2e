"""Regression suite against the closed-form cases.

``fast`` runs at coarse grids in well under two minutes; ``full`` adds the
512^2 manufactured solves.  ``inject_fault`` perturbs the Beurling multiplier
so the suite can be checked to fail.
"""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass
from unittest import mock

import numpy as np

from . import transforms
from .beltrami import effective_coefficient, principal_solution
from .coefficients import CoefficientPair, builtin_family
from .conformal import JordanBoundary, boundary_correspondence, map_to_disk
from .criteria import criteria_report, headline, modulus_bound
from .dirichlet import DirichletProblem, solve_bounded
from .grid import ComplexField, GridSpec
from .oracle import (brute_force_beurling, degenerate_radial_case, ellipse_radius,
                     radial_stretch_case, radial_stretch_principal, theodorsen_disk_angles,
                     two_characteristics_split)

LEVELS = ("fast", "full")
FAULTS = ("beurling",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    seconds: float

    def row(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<40} {self.value:11.3e} < {self.limit:9.2e}  {self.seconds:7.1f}s"


@contextmanager
def injected(fault: str | None):
    if fault is None:
        yield
        return
    if fault != "beurling":
        raise ValueError(f"unknown fault {fault!r}; expected one of {FAULTS}")
    original = transforms._beurling_multiplier
    with mock.patch.object(transforms, "_beurling_multiplier",
                           lambda N, h: 1.05 * original(N, h)):
        yield


def _smooth_density(spec: GridSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = spec.z
    out = np.zeros(z.shape, complex)
    for _ in range(4):
        c = complex(*rng.uniform(-0.3, 0.3, 2))
        w = rng.uniform(0.15, 0.3)
        out += complex(*rng.normal(size=2)) * np.exp(-np.abs(z - c) ** 2 / w ** 2)
    return out * (np.abs(z) < 0.8 * spec.half_width)


def beurling_vs_brute_force() -> float:
    spec = GridSpec(0j, 1.0, 48)
    worst = 0.0
    for seed in range(3):
        w = ComplexField(spec, _smooth_density(spec, seed))
        a = transforms.beurling_transform(w).values
        b = brute_force_beurling(w).values
        worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(b)))
    return worst


def beurling_isometry(n: int = 256) -> float:
    spec = GridSpec(0j, 1.0, n)
    w = _smooth_density(spec, 7)
    w = np.where(np.abs(spec.z) < 0.8, w - w[np.abs(spec.z) < 0.8].mean(), 0)
    s = transforms.beurling_transform(ComplexField(spec, w), padded=True)
    return float(abs(np.linalg.norm(s) / np.linalg.norm(w) - 1))


def principal_radial_stretch(n: int) -> float:
    spec = GridSpec(0j, 1.2, n)
    mask = np.abs(spec.z) < 1
    pair = builtin_family("radial-power", {"a": 0.5}, spec, mask)
    sol = principal_solution(effective_coefficient(pair))
    return float(np.max(np.abs(sol.G.values - radial_stretch_principal(spec.z))))


def disk_identity(m: int = 256) -> float:
    dmap = map_to_disk(JordanBoundary.circle(m))
    pts = 0.9 * np.exp(2j * np.pi * np.arange(97) / 97) * np.linspace(0, 1, 97)
    return float(np.max(np.abs(dmap(pts) - pts)))


def square_symmetry(m: int = 256) -> float:
    dmap = map_to_disk(JordanBoundary.square(m))
    pts = 0.6 * (np.linspace(-1, 1, 31)[:, None] + 1j * np.linspace(-1, 1, 31)[None, :]).ravel()
    return float(np.max(np.abs(dmap(1j * pts) - 1j * dmap(pts))))


def ellipse_correspondence(m: int = 512) -> float:
    a, b = 1.0, 0.6
    boundary = JordanBoundary.ellipse(a, b, m)
    table = boundary_correspondence(map_to_disk(boundary))
    expected = theodorsen_disk_angles(ellipse_radius(a, b), np.angle(boundary.vertices))
    return float(np.max(np.abs(np.angle(np.exp(1j * (table.angles - expected))))))


def _manufactured(n: int, split: float | None) -> tuple[float, float]:
    spec = GridSpec(0j, 1.2, n)
    boundary = JordanBoundary.circle(512)
    mask = boundary.mask(spec)
    case = radial_stretch_case(2.0, 2)
    if split is not None:
        case = two_characteristics_split(case, split)
    problem = DirichletProblem.on_boundary(boundary, case.phi, case.pair(spec, mask))
    state, rec = solve_bounded(problem)
    inner = mask & (np.abs(spec.z) <= 0.9)
    return float(np.max(np.abs(state.f.values - case.f(spec.z))[inner])), rec.equation_residual


def identity_solve(n: int) -> float:
    spec = GridSpec(0j, 1.2, n)
    boundary = JordanBoundary.circle(512)
    mask = boundary.mask(spec)
    problem = DirichletProblem.on_boundary(boundary, lambda v: v.real,
                                           CoefficientPair.zero(spec, mask))
    state, _ = solve_bounded(problem)
    inner = mask & (np.abs(spec.z) <= 0.9)
    return float(np.max(np.abs(state.f.values - spec.z)[inner]))


def degenerate_verdicts() -> float:
    """Number of headline verdicts that disagree with the closed-form expectations."""
    wrong = 0
    for prof in ("log", "loglog", "exp"):
        case = degenerate_radial_case(prof)
        got = headline(criteria_report(case))
        want = tuple(case.expected[k] for k in ("fmo", "lehto", "exp_integrability"))
        wrong += sum(g != w for g, w in zip(got, want))
    return float(wrong)


def modulus_closed_form() -> float:
    one = lambda z: np.ones(np.shape(z))
    worst = 0.0
    for ratio in (4, 16, 256):
        got = modulus_bound(one, 0j, 0.25 / ratio, 0.25)["bound"]
        worst = max(worst, abs(got / (2 * np.pi / np.log(ratio)) - 1))
    return worst


def suite(level: str):
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    checks = [
        ("beurling spectral vs brute force 48^2", beurling_vs_brute_force, 0.02),
        ("beurling L2 isometry 256^2", beurling_isometry, 1e-10),
        ("disk map identity", disk_identity, 1e-4),
        ("square map Z4 symmetry", square_symmetry, 1e-5),
        ("ellipse correspondence vs Theodorsen", ellipse_correspondence, 1e-4),
        ("modulus bound closed form", modulus_closed_form, 1e-8),
        ("degenerate family verdicts", degenerate_verdicts, 0.5),
        ("principal solution K=2, 128^2", lambda: principal_radial_stretch(128), 1.5e-2),
        ("identity solve 128^2", lambda: identity_solve(128), 1e-4),
        ("manufactured K=2 solve 128^2", lambda: _manufactured(128, None)[0], 2e-2),
    ]
    if level == "full":
        checks += [
            ("identity solve 512^2", lambda: identity_solve(512), 1e-4),
            ("manufactured K=2 solve 512^2", lambda: _manufactured(512, None)[0], 1e-2),
            ("two-characteristics split solve 512^2", lambda: _manufactured(512, 0.5)[0], 2e-2),
        ]
    return checks


def run(level: str = "fast", fault: str | None = None, out=print) -> list:
    results = []
    with injected(fault):
        for name, func, limit in suite(level):
            t0 = time.perf_counter()
            try:
                value = func()
            except Exception as exc:  # a crash is a failed check, not a crashed suite
                out(f"ERROR {name}: {exc}")
                value = float("inf")
            res = CheckResult(name, bool(value < limit), value, limit, time.perf_counter() - t0)
            out(res.row())
            results.append(res)
    return results
