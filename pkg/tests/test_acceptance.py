"""The ten acceptance criteria at their stated tolerances; each prints one PASS/FAIL line."""
import json
import time

import numpy as np
import pytest

from beltrami_dirichlet.beltrami import effective_coefficient, principal_solution
from beltrami_dirichlet.cli import main
from beltrami_dirichlet.coefficients import CoefficientPair, builtin_family, dilatation
from beltrami_dirichlet.conformal import JordanBoundary
from beltrami_dirichlet.criteria import (CONDITIONS, PhiCondition, criteria_report,
                                         equicontinuity_bound, headline, modulus_bound,
                                         phi_condition_tests, tangent_splice)
from beltrami_dirichlet.criteria.verdicts import SATISFIED
from beltrami_dirichlet.dirichlet import DirichletProblem, equation_residual, solve
from beltrami_dirichlet.grid import GridSpec
from beltrami_dirichlet.oracle import (degenerate_radial_case, radial_stretch_case,
                                       radial_stretch_principal, two_characteristics_split)
from beltrami_dirichlet.verify import (beurling_isometry, beurling_vs_brute_force, disk_identity,
                                       ellipse_correspondence, square_symmetry)

pytestmark = pytest.mark.acceptance

BOUNDARY = JordanBoundary.circle(512)


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, checks: dict):
        ok = all(passed for passed, _ in checks.values())
        detail = "; ".join(f"{k}={v}" for k, (_, v) in checks.items())
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{detail}]")
        failed = [k for k, (passed, _) in checks.items() if not passed]
        assert not failed, f"criterion {number} failed on {failed}: {detail}"
    return emit


def disk_grid(n: int):
    spec = GridSpec(0j, 1.2, n)
    return spec, BOUNDARY.mask(spec)


def manufactured(split):
    spec, mask = disk_grid(512)
    case = radial_stretch_case(2.0, 2)
    if split is not None:
        case = two_characteristics_split(case, split)
    pair = case.pair(spec, mask)
    t0 = time.perf_counter()
    # K = 2 exactly, so level 4 keeps round-off from truncating it
    rep = solve(DirichletProblem.on_boundary(BOUNDARY, case.phi, pair), levels=(4,))
    seconds = time.perf_counter() - t0
    inner = mask & (np.abs(spec.z) <= 0.9)
    err = float(np.max(np.abs(rep.f.values - case.f(spec.z))[inner]))
    return rep, err, seconds, pair, spec


def test_analytic_identity(verdict):
    spec, mask = disk_grid(512)
    t0 = time.perf_counter()
    rep = solve(DirichletProblem.on_boundary(BOUNDARY, lambda v: v.real,
                                             CoefficientPair.zero(spec, mask)), levels=(2,))
    seconds = time.perf_counter() - t0
    inner = mask & (np.abs(spec.z) <= 0.9)
    err = float(np.max(np.abs(rep.f.values - spec.z)[inner]))
    verdict(1, "analytic case mu = nu = 0 at 512^2", {
        "interior_sup": (err < 1e-4, f"{err:.2e}"),
        "boundary_sup": (rep.state.boundary_error < 1e-6, f"{rep.state.boundary_error:.2e}"),
        "seconds": (seconds < 30, f"{seconds:.1f}"),
    })


def test_manufactured_one_characteristic(verdict):
    rep, err, seconds, _, _ = manufactured(None)
    res = rep.final_residual["l2_rel"]
    verdict(2, "manufactured mu = -(1/3) z/zbar at 512^2", {
        "interior_sup": (err < 1e-2, f"{err:.2e}"),
        "residual": (res < 2e-2, f"{res:.2e}"),
        "seconds": (seconds < 180, f"{seconds:.1f}"),
    })


def test_manufactured_two_characteristics(verdict):
    rep, err, _, pair, spec = manufactured(0.5)
    one = radial_stretch_case(2.0, 2).pair(*disk_grid(512))
    k_split = dilatation(pair).values
    k_one = dilatation(one).values
    drift = float(np.max(np.abs(k_split - k_one)))
    verdict(3, "two-characteristics split t = 0.5 at 512^2", {
        "interior_sup": (err < 2e-2, f"{err:.2e}"),
        "K_preserved": (drift <= 1e-14, f"{drift:.1e}"),
    })


def test_beurling_operator(verdict):
    brute = beurling_vs_brute_force()
    iso = beurling_isometry(256)
    verdict(4, "Beurling spectral vs brute force, L2 isometry", {
        "brute_force_48": (brute < 0.02, f"{brute:.2e}"),
        "isometry_256": (iso < 1e-10, f"{iso:.1e}"),
    })


def test_principal_solution(verdict):
    spec, _ = disk_grid(512)
    coeff = effective_coefficient(builtin_family("radial-power", {"a": 0.5}, spec,
                                                 np.abs(spec.z) < 1))
    sol = principal_solution(coeff)
    err = float(np.max(np.abs(sol.G.values - radial_stretch_principal(spec.z))))
    rate = sol.contraction()
    verdict(5, "principal solution of the K = 2 radial stretch at 512^2", {
        "sup_error": (err < 5e-3, f"{err:.2e}"),
        "contraction": (rate <= coeff.bound + 0.05, f"{rate:.3f} vs k={coeff.bound:.3f}"),
    })


def test_conformal_mapper(verdict):
    disk, square, ellipse = disk_identity(), square_symmetry(), ellipse_correspondence()
    verdict(6, "conformal mapper", {
        "disk": (disk < 1e-4, f"{disk:.1e}"),
        "square_Z4": (square < 1e-5, f"{square:.1e}"),
        "ellipse_angle": (ellipse < 1e-4, f"{ellipse:.1e}"),
    })


def test_criteria_battery(verdict):
    checks = {}
    for profile, want in (("log", (SATISFIED,) * 3), ("loglog", (SATISFIED,) * 3)):
        got = headline(criteria_report(degenerate_radial_case(profile)))
        checks[profile] = (got == want, "/".join(got))
    exp_report = criteria_report(degenerate_radial_case("exp"))
    exp_verdicts = {k: t["verdict"] for k, t in exp_report["tests"].items()
                    if t["verdict"] != "not_applicable"}
    checks["exp"] = (SATISFIED not in exp_verdicts.values(), "/".join(exp_verdicts.values()))
    phis = {"exp(t)": PhiCondition.exponential(), "t^2": PhiCondition.power(2),
            "spliced exp(sqrt t)": tangent_splice(PhiCondition.from_log(np.sqrt), 1.0)}
    for label, cond in phis.items():
        r = phi_condition_tests(cond)
        seen = {r["conditions"][c].verdict for c in CONDITIONS}
        checks[label] = (r["agree"], "/".join(sorted(seen)))
    verdict(7, "criteria battery and Phi-condition agreement", checks)


def test_ladder_trend(verdict):
    # scale 2 makes the levels below 32 distinct at 256^2; see the README limitations
    spec, mask = disk_grid(256)
    pair = builtin_family("radial-log-K", {"profile": "log", "scale": 2.0}, spec, mask)
    t0 = time.perf_counter()
    rep = solve(DirichletProblem.on_boundary(BOUNDARY, lambda v: v.real, pair),
                levels=(4, 8, 16, 32))
    seconds = time.perf_counter() - t0
    d = rep.cross_level_distances
    res = equation_residual(rep.f, pair, cutoff=32)["l2_rel"]
    verdict(8, "log-K ladder (4, 8, 16, 32) at 256^2", {
        "strictly_decreasing": (all(b < a for a, b in zip(d, d[1:])),
                                "[" + ", ".join(f"{x:.3f}" for x in d) + "]"),
        "residual_K_le_32": (res < 5e-2, f"{res:.3e}"),
        "seconds": (seconds < 600, f"{seconds:.1f}"),
    })


def test_modulus_closed_form(verdict):
    one = lambda z: np.ones(np.shape(z))
    checks = {}
    for ratio in (4, 16, 256):
        got = modulus_bound(one, 0j, 0.25 / ratio, 0.25)["bound"]
        rel = abs(got / (2 * np.pi / np.log(ratio)) - 1)
        checks[f"ratio_{ratio}"] = (rel < 1e-8, f"{rel:.1e}")
    M = np.geomspace(1e-3, 50, 200)
    vals = np.array([equicontinuity_bound(1.0, m) for m in M])
    # exp(-2 pi / M) underflows to 0 for small M, so ties are allowed only there
    pos = vals[:-1] > 0
    mono = bool(np.all(np.diff(vals) >= 0) and np.all(np.diff(vals)[pos] > 0))
    checks["monotone"] = (mono, "increasing in M")
    tiny = equicontinuity_bound(1.0, 1e-3)
    checks["to_zero"] = (tiny == 0.0 or tiny < 1e-300, f"{tiny:.1e}")
    verdict(9, "modulus closed form and equicontinuity", checks)


def test_determinism(verdict, tmp_path):
    cfg = {"schema": 1, "domain": {"type": "disk", "radius": 1.0, "vertices": 512},
           "coefficients": {"manufactured": {"case": "radial-stretch", "K": 2, "degree": 2,
                                             "split": 0.5}},
           "boundary_datum": {"manufactured": True},
           "solver": {"grid": 128, "levels": [4, 8]}, "output": {"dir": "out"}}
    bodies, codes = [], []
    for name in ("a", "b"):
        run = tmp_path / name
        run.mkdir()
        (run / "run.json").write_text(json.dumps(cfg))
        codes.append(main(["solve", str(run / "run.json")]))
        bodies.append((run / "out" / "report.json").read_bytes())
    verdict(10, "cmd_solve twice gives identical report.json", {
        "exit_codes": (codes == [0, 0], str(codes)),
        "byte_identical": (bodies[0] == bodies[1], f"{len(bodies[0])} bytes"),
    })
