import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beltrami_dirichlet.coefficients import CoefficientPair, builtin_family
from beltrami_dirichlet.criteria import (INCONCLUSIVE, NOT_APPLICABLE, SATISFIED, VIOLATED,
                                         PhiCondition, PhiTableError, as_sampler,
                                         bmo_norm_estimate, bmo_profile, boundedness_verdict,
                                         circle_mean, combine, criteria_report,
                                         divergence_verdict, equicontinuity_bound,
                                         exponential_integrability, fmo_annulus_bound_check,
                                         fmo_test, headline, lehto_divergence_test,
                                         log_scale_tests, modulus_bound, phi_condition_tests,
                                         phi_integral_budget, phi_inverse, ratio_verdict,
                                         tangent_splice)
from beltrami_dirichlet.criteria.verdicts import MIN_TREND_POINTS
from beltrami_dirichlet.grid import GridSpec, RealField
from beltrami_dirichlet.oracle import degenerate_radial_case

one = lambda z: np.ones(np.shape(z))
log_inv = lambda z: np.log(1 / np.abs(z))
inv = lambda z: 1 / np.abs(z)


def test_bmo_of_constant_is_zero():
    assert bmo_norm_estimate(one) < 1e-12


def test_bmo_of_log_is_bounded():
    assert bmo_norm_estimate(log_inv) <= 2


def test_bmo_profile_grows_for_inverse_distance():
    profile = bmo_profile(inv)
    osc = [o for _, o in profile]
    assert osc[-1] > 100 * osc[0]


@pytest.mark.parametrize("u, want", [(one, SATISFIED), (log_inv, SATISFIED), (inv, VIOLATED)])
def test_fmo_at_origin(u, want):
    assert fmo_test(u, 0j).verdict == want


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_fmo_translation_invariant(x, y):
    c = complex(x, y)
    shifted = lambda z: log_inv(z - c)
    a = fmo_test(log_inv, 0j)
    b = fmo_test(shifted, c)
    assert a.verdict == b.verdict
    # z - c at radius 1e-12 keeps only about 4 digits of the offset
    np.testing.assert_allclose(a.evidence["mean_oscillation"], b.evidence["mean_oscillation"],
                               rtol=1e-4)


def test_bmo_function_has_finite_mean_oscillation():
    # log|z - 1/2| is in BMO, so it passes the FMO test anywhere
    u = lambda z: np.log(np.abs(z - 0.5))
    for z0 in (0.5, 0j, 0.3j):
        assert fmo_test(u, z0).verdict == SATISFIED


def test_fmo_centering_evidence():
    v = fmo_test(log_inv, 0j, centering=lambda e: np.log(1 / e) + 0.5)
    assert v.evidence["centered"]["verdict"] == SATISFIED
    # the disc means of log(1/|z|) grow, so the bounded-means shortcut is silent
    assert v.evidence["bounded_means"]["verdict"] == INCONCLUSIVE


def test_fmo_outside_mask_rejected():
    with pytest.raises(ValueError):
        fmo_test(one, 2.0, mask_contains=lambda z: abs(z) <= 1)


def test_annulus_bound_zero():
    r = fmo_annulus_bound_check(lambda z: np.zeros(np.shape(z)))
    assert np.all(r["integral"] == 0)


def test_annulus_bound_constant_one():
    # int_1^L 2 pi / s^2 ds = 2 pi (1 - 1/L): bounded, so the ratio to log log decays
    r = fmo_annulus_bound_check(one)
    L = np.log(1 / r["eps"])
    np.testing.assert_allclose(r["integral"], 2 * np.pi * (1 - 1 / L), rtol=1e-9)


def test_annulus_bound_log():
    # u = log(1/|z|) = s gives exactly 2 pi log log(1/eps)
    r = fmo_annulus_bound_check(log_inv)
    np.testing.assert_allclose(r["integral"], 2 * np.pi * r["loglog"], rtol=1e-9)
    assert r["fitted_constant"] == pytest.approx(2 * np.pi, rel=1e-9)
    assert r["ratio_stabilizes"]


def test_annulus_bound_rejects_large_eps():
    with pytest.raises(ValueError):
        fmo_annulus_bound_check(one, eps_sweep=[0.5])


def test_circle_mean_constant():
    np.testing.assert_allclose(circle_mean(lambda z: np.full(np.shape(z), 5.0), 0.2j, [0.1, 0.3]), 5.0)


def test_circle_mean_radial_log():
    radii = np.array([1e-3, 0.1, 0.7])
    np.testing.assert_allclose(circle_mean(log_inv, 0j, radii), np.log(1 / radii), rtol=1e-6)


def test_circle_mean_harmonic():
    # mean value property
    np.testing.assert_allclose(circle_mean(lambda z: 1 + np.real(z), 0.3, [0.05, 0.5]), 1.3,
                               rtol=1e-12)


def test_circle_mean_grid_checks():
    spec = GridSpec(0j, 1.0, 32)
    K = RealField(spec, np.ones((32, 32)))
    with pytest.raises(ValueError):
        circle_mean(K, 0j, [spec.step])
    with pytest.raises(ValueError):
        circle_mean(K, 0.9, [0.5])
    np.testing.assert_allclose(circle_mean(K, 0j, [0.5]), 1.0)


@pytest.mark.parametrize("profile, want", [
    (lambda r: np.full(np.shape(r), 3.0), SATISFIED),
    (lambda r: 1 + np.log(1 / r), SATISFIED),
    (lambda r: 1 / r, VIOLATED),
])
def test_lehto(profile, want):
    assert lehto_divergence_test(profile).verdict == want


def test_lehto_rejects_nonpositive_profile():
    with pytest.raises(ValueError):
        lehto_divergence_test(lambda r: np.zeros(np.shape(r)))


def test_phi_inverse_exponential():
    np.testing.assert_allclose(phi_inverse(PhiCondition.exponential(), [1, np.e, 10]),
                               [0, 1, np.log(10)], atol=1e-9)


def test_phi_inverse_at_jump():
    step = PhiCondition(np.array([0, 2, 2, 10.0]), np.log(np.array([1, 1, 5, 6.0])))
    assert phi_inverse(step, 3) == 2.0
    assert phi_inverse(step, 1) == 0.0
    assert phi_inverse(step, 0) == 0.0


@given(st.floats(0.0, 30.0))
def test_phi_inverse_left_inverse(t):
    cond = PhiCondition.power(2)
    assert phi_inverse(cond, cond.phi(t)) <= t * (1 + 1e-9) + 1e-9


def test_phi_inverse_non_decreasing():
    cond = PhiCondition.from_log(lambda t: np.sqrt(t))
    tau = np.geomspace(1e-3, 1e30, 400)
    assert np.all(np.diff(phi_inverse(cond, tau)) >= 0)


def test_phi_table_validation():
    with pytest.raises(PhiTableError):
        PhiCondition(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
    with pytest.raises(PhiTableError):
        PhiCondition(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(PhiTableError):
        PhiCondition(np.array([0.0, 1, 1, 1]), np.array([0.0, 1, 2, 3]))


def test_phi_from_csv(tmp_path):
    p = tmp_path / "phi.csv"
    t = np.linspace(0, 10, 50)
    np.savetxt(p, np.column_stack([t, np.exp(t)]), delimiter=",", header="t,phi", comments="")
    cond = PhiCondition.from_csv(p)
    assert cond.log_phi(5.0) == pytest.approx(5.0, rel=1e-9)
    assert cond.is_convex()


def test_exponential_phi_satisfies_all_conditions():
    r = phi_condition_tests(PhiCondition.exponential())
    assert r["agree"] and r["overall"] == SATISFIED


def test_square_phi_violates_all_conditions():
    r = phi_condition_tests(PhiCondition.power(2))
    assert r["agree"] and r["overall"] == VIOLATED


def test_slowly_divergent_phi():
    # H = t / log(e + t): the log-weighted integrals diverge like log log
    r = phi_condition_tests(PhiCondition.from_log(lambda t: t / np.log(np.e + t)))
    c = r["conditions"]
    assert c["weighted"].verdict == c["reciprocal"].verdict == SATISFIED
    # tau = Phi(t) overflows before the inverse integral shows its divergence
    if not r["agree"]:
        assert r["resolution_failure"] and r["overall"] == INCONCLUSIVE


def test_tangent_splice_is_convex_and_keeps_tail():
    base = PhiCondition.from_log(lambda t: np.sqrt(t))
    spliced = tangent_splice(base, 1.0)
    assert spliced.is_convex()
    assert spliced.phi(0.5) == 0
    assert spliced.log_phi(1e6) == pytest.approx(1e3, rel=1e-5)
    r = phi_condition_tests(spliced)
    assert r["agree"] and r["overall"] == VIOLATED


def test_budget_constant_on_grid():
    spec = GridSpec(0j, 1.0, 128)
    mask = np.abs(spec.z) < 0.75
    v = phi_integral_budget(RealField(spec, np.ones((128, 128))), PhiCondition.exponential(),
                            mask=mask)
    assert v.verdict == SATISFIED
    assert v.evidence["value"] == pytest.approx(np.e * mask.sum() * spec.step ** 2, rel=1e-9)


def test_budget_constant_callable():
    v = phi_integral_budget(one, PhiCondition.exponential(), delta=0.5)
    assert v.verdict == SATISFIED
    assert v.evidence["value"] == pytest.approx(np.e * np.pi * 0.25, rel=1e-6)


def test_budget_log_family():
    # exp(log(1/r)) = 1/r: integral over the unit disc is 2 pi, times e from the offset
    K = lambda z: 1 + np.log(1 / np.abs(z))
    v = phi_integral_budget(K, PhiCondition.exponential(), delta=1.0, r_min=1e-15)
    assert v.verdict == SATISFIED
    assert v.evidence["value"] == pytest.approx(2 * np.pi * np.e, rel=1e-4)


def test_exponential_integrability():
    assert exponential_integrability(lambda z: 1 + np.log(1 / np.abs(z))).verdict == SATISFIED
    assert exponential_integrability(lambda z: 1 / np.abs(z)).verdict == VIOLATED


def test_log_scale_bounded_dilatation():
    out = {v.test: v.verdict for v in log_scale_tests(one)}
    assert out == {"log_scale": SATISFIED, "log_scale_weighted": SATISFIED}


def test_log_scale_cubed_log_violates():
    out = {v.test: v.verdict for v in log_scale_tests(lambda z: log_inv(z) ** 3)}
    assert out == {"log_scale": VIOLATED, "log_scale_weighted": VIOLATED}


def test_log_scale_weighted_only():
    # K = log(1/r): the plain ratio tends to a constant, the weighted one to 0
    out = {v.test: v for v in log_scale_tests(log_inv)}
    assert out["log_scale_weighted"].verdict != VIOLATED
    assert out["log_scale"].verdict != SATISFIED


@pytest.mark.parametrize("ratio", [4, 16, 256])
def test_modulus_closed_form(ratio):
    got = modulus_bound(one, 0j, 0.25 / ratio, 0.25)["bound"]
    assert got == pytest.approx(2 * np.pi / np.log(ratio), rel=1e-8)


def test_modulus_inverse_log_closed_form():
    # psi = 1/(t log 1/t), s = log 1/t: I = log(b/a), numerator 2 pi (1/a - 1/b)
    eps, eps0 = 1e-8, 0.25
    a, b = np.log(1 / eps0), np.log(1 / eps)
    got = modulus_bound(one, 0j, eps, eps0, psi="inverse_log")["bound"]
    assert got == pytest.approx(2 * np.pi * (1 / a - 1 / b) / np.log(b / a) ** 2, rel=1e-8)


def test_modulus_validation():
    with pytest.raises(ValueError):
        modulus_bound(one, 0j, 0.5, 0.25)
    with pytest.raises(ValueError):
        modulus_bound(one, 0j, 0.1, 0.25, psi="other")


def test_equicontinuity_value():
    M = 2 * np.pi / np.log(16)
    # exp(-log 16) = 1/16, so 32/16 = 2
    assert equicontinuity_bound(1.0, M) == pytest.approx(2.0, rel=1e-12)
    assert equicontinuity_bound(0.5, 2 * np.pi) == pytest.approx(64 * np.exp(-1), rel=1e-12)


def test_equicontinuity_monotone_and_vanishing():
    vals = [equicontinuity_bound(1.0, modulus_bound(one, 0j, 0.25 / 2 ** k, 0.25)["bound"])
            for k in range(2, 30, 3)]
    assert np.all(np.diff(vals) < 0)
    # the bound is 32 / ratio for K = 1
    assert vals[-1] == pytest.approx(32 / 2 ** 29, rel=1e-8)


def test_equicontinuity_validation():
    with pytest.raises(ValueError):
        equicontinuity_bound(0.0, 1.0)


def test_report_bounded_dilatation():
    # 128^2 leaves three dyadic radii above the four-step sweep floor
    spec = GridSpec(0j, 1.2, 128)
    mask = np.abs(spec.z) < 1
    pair = builtin_family("radial-power", {"a": 0.5}, spec, mask)
    rep = criteria_report(pair)
    assert rep["overall"] == SATISFIED
    assert "exp_integrability" in rep["satisfied_by"]
    assert rep["tests"]["phi"]["verdict"] == NOT_APPLICABLE
    # away from the origin node; two shells above the sweep floor cannot settle Lehto
    off = criteria_report(pair, points=[0.4, -0.4j, 0.3 + 0.3j])
    fmo, lehto, exp_int = headline(off)
    assert fmo == exp_int == SATISFIED
    assert lehto != VIOLATED


def test_report_origin_node_artifact():
    # mu = 0 on the origin node only: a one-cell dip whose oscillation grows like (h/eps)^2
    spec = GridSpec(0j, 1.2, 128)
    pair = builtin_family("radial-power", {"a": 0.5}, spec, np.abs(spec.z) < 1)
    rep = criteria_report(pair, points=[0j])
    assert rep["tests"]["fmo"]["verdict"] == VIOLATED
    assert rep["overall"] == SATISFIED


def test_report_zero_pair_has_nu_only_test():
    spec = GridSpec(0j, 1.2, 32)
    rep = criteria_report(CoefficientPair.zero(spec, np.abs(spec.z) < 1))
    assert rep["tests"]["nu_only"]["verdict"] == SATISFIED


@pytest.mark.parametrize("profile", ["log", "loglog", "exp"])
def test_report_degenerate_families(profile):
    case = degenerate_radial_case(profile)
    got = headline(criteria_report(case))
    assert got == tuple(case.expected[k] for k in ("fmo", "lehto", "exp_integrability"))


def test_report_with_phi():
    K = lambda z: 1 + np.log(1 / np.abs(z))
    rep = criteria_report(K, cond=PhiCondition.exponential(), points=[0j])
    assert rep["phi_conditions"]["overall"] == SATISFIED
    assert rep["tests"]["phi"]["verdict"] == SATISFIED


def test_report_rejects_other_types():
    with pytest.raises(TypeError):
        criteria_report(3.0)


def test_boundedness_verdicts():
    x = 2.0 ** np.arange(10)
    assert boundedness_verdict(x, np.ones(10))[0] == SATISFIED
    assert boundedness_verdict(x, x)[0] == VIOLATED
    assert boundedness_verdict(x, np.sqrt(np.sqrt(x)))[0] == INCONCLUSIVE
    assert boundedness_verdict(x, np.full(10, np.inf))[0] == VIOLATED
    assert boundedness_verdict(x[:2], x[:2])[0] == INCONCLUSIVE


def test_divergence_verdicts():
    k = np.arange(1, 41, dtype=float)
    assert divergence_verdict(np.ones(40))[0] == "divergent"
    assert divergence_verdict(1 / k)[0] == "divergent"
    assert divergence_verdict(0.5 ** k)[0] == "convergent"
    assert divergence_verdict(np.ones(MIN_TREND_POINTS - 1))[0] == INCONCLUSIVE


def test_ratio_verdicts():
    b = 2.0 ** np.arange(1, 12)
    assert ratio_verdict(b, 1 / b)[0] == SATISFIED
    assert ratio_verdict(b, np.ones(11))[0] == VIOLATED


def test_combine():
    assert combine([SATISFIED, SATISFIED]) == SATISFIED
    assert combine([SATISFIED, VIOLATED, INCONCLUSIVE]) == VIOLATED
    assert combine([SATISFIED, INCONCLUSIVE]) == INCONCLUSIVE
    assert combine([NOT_APPLICABLE]) == NOT_APPLICABLE


def test_sampler_caps_nonfinite_nodes():
    spec = GridSpec(0j, 1.0, 16)
    vals = np.ones((16, 16))
    vals[8, 8] = np.inf
    vals[3, 3] = 7.0
    su = as_sampler(RealField(spec, vals))
    assert su.degenerate.size == 1
    assert np.all(np.isfinite(su(spec.z)))
    assert su(spec.z[8, 8]) == 7.0
    with pytest.raises(TypeError):
        as_sampler("not a field")
