"""Tests built on circle means of the dilatation around a point: Lehto-type
divergence, log-scale growth conditions and the modulus upper bound."""
from __future__ import annotations

import numpy as np

from .verdicts import (DEFAULT_THRESHOLDS, INCONCLUSIVE, SATISFIED, VIOLATED, CriteriaVerdict,
                       Thresholds, as_sampler, boundedness_verdict, divergence_verdict,
                       ratio_verdict)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
SHELLS = 64
RATIO_FACTOR = np.sqrt(2)  # ratio trends are sampled twice per octave


def circle_mean(K, z0: complex, radii, n_angles: int = 1024) -> np.ndarray:
    """Trapezoid average of ``K`` over circles ``|z - z0| = r``."""
    su = as_sampler(K)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if su.spec is not None:
        if np.any(radii < 0.5 * su.min_radius):
            raise ValueError("radii must be at least two grid steps")
        if not su.inside_grid(z0, float(radii.max())):
            raise ValueError("circle leaves the grid")
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    pts = z0 + radii[:, None] * np.exp(1j * th)[None, :]
    with np.errstate(invalid="ignore", over="ignore"):
        return su(pts).mean(axis=1)


def _shell_edges(delta: float, r_min: float, shells: int = SHELLS, factor: float = 2.0) -> np.ndarray:
    """Edges in ``s = log(1/r)``: radii shrink by ``factor`` per shell from ``delta`` inward."""
    count = max(1, min(shells, int(np.floor(np.log(delta / r_min) / np.log(factor) + 1e-9))))
    return np.log(1 / delta) + np.log(factor) * np.arange(count + 1)


def _shell_integrals(func, edges: np.ndarray) -> np.ndarray:
    """``int f(s) ds`` over each interval of ``edges`` by 16-point Gauss."""
    a, b = edges[:-1], edges[1:]
    s = 0.5 * (b - a)[:, None] * (_GL_X[None, :] + 1) + a[:, None]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = func(s.ravel()).reshape(s.shape)
        return 0.5 * (b - a) * np.sum(_GL_W[None, :] * vals, axis=1)


def profile_from(K, z0: complex = 0j):
    """Circle-mean profile ``k(r)`` of a field or callable, as a callable of ``r``."""
    su = as_sampler(K)
    return (lambda r: circle_mean(su, z0, r, 256)), su.min_radius


def lehto_divergence_test(profile, delta: float = 0.5, r_min: float = 1e-12,
                          th: Thresholds = DEFAULT_THRESHOLDS, z0=None) -> CriteriaVerdict:
    """Does ``int_0^delta dr / (r k(r))`` diverge?  ``profile`` is ``k`` as a callable of ``r``.

    In ``s = log(1/r)`` the shells are unit-free: ``int ds / k(e^-s)``.
    """
    edges = _shell_edges(delta, r_min)

    def integrand(s):
        k = profile(np.exp(-s))
        if np.any(k <= 0):
            raise ValueError("profile must be positive")
        return 1.0 / k

    inc = _shell_integrals(integrand, edges)
    kind, ev = divergence_verdict(inc, th)
    verdict = {"divergent": SATISFIED, "convergent": VIOLATED}.get(kind, INCONCLUSIVE)
    # sufficient check: k(r) = O(log 1/r)
    r = np.exp(-edges[1:])
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = profile(r) / np.log(1 / r)
    sv, slope = boundedness_verdict(np.log(1 / r), ratio, th)
    ev["log_growth_check"] = {"verdict": SATISFIED if sv == SATISFIED else INCONCLUSIVE,
                              "fitted_log_slope": slope}
    ev["r_min"] = float(r[-1])
    return CriteriaVerdict("lehto", verdict, ev, z0)


def log_scale_tests(K, z0: complex = 0j, eps0: float = 0.25, th: Thresholds = DEFAULT_THRESHOLDS,
                    r_min: float | None = None) -> list:
    """Growth of ``int_{eps<|z-z0|<eps0} K / |z-z0|^2`` against ``log(1/eps)^2`` and of the
    log-weighted variant against ``(log log(1/eps))^2`` (which needs ``eps0 < 1/e``).

    The scales are measured from ``eps0`` (``log(eps0/eps)`` and
    ``log(log(1/eps) / log(1/eps0))``), which leaves the little-o
    conditions unchanged but makes bounded ``K`` decay from the first shell.
    """
    su = as_sampler(K)
    r_min = su.min_radius if r_min is None else r_min
    out = []
    k = lambda s: circle_mean(su, z0, np.exp(-s), 256)
    variants = [("log_scale", eps0, lambda s: 2 * np.pi * k(s), lambda s, s0: s - s0),
                ("log_scale_weighted", min(eps0, 0.9 * np.exp(-1)),
                 lambda s: 2 * np.pi * k(s) / s ** 2, lambda s, s0: np.log(s / s0))]
    for name, e0, integrand, base_of in variants:
        edges = _shell_edges(e0, r_min, 2 * SHELLS, RATIO_FACTOR)
        I = np.cumsum(_shell_integrals(integrand, edges))
        base = base_of(edges[1:], edges[0])
        ratio = I / base ** 2
        verdict, slope = ratio_verdict(base, ratio, th)
        out.append(CriteriaVerdict(name, verdict, {"eps": np.exp(-edges[1:]), "integral": I,
                                                   "scale": base, "ratio": ratio,
                                                   "fitted_log_slope": slope, "eps0": e0},
                                   complex(z0)))
    return out


PSI_FAMILIES = ("inverse", "inverse_log", "lehto")


def modulus_bound(K, z0: complex, eps: float, eps0: float, psi: str = "inverse",
                  profile=None) -> dict:
    """``int K rho^2`` over the annulus with ``rho = psi(|z - z0|) / I(eps)``.

    ``I(eps) = int_eps^eps0 psi``.  Both integrals run in ``s = log(1/t)``
    on dyadic shells, so radial closed forms are matched to round-off.
    """
    if not 0 < eps < eps0:
        raise ValueError("need 0 < eps < eps0")
    su = as_sampler(K)
    kmean = lambda t: circle_mean(su, z0, t, 256)
    if psi == "inverse":
        t_psi = lambda s: np.ones_like(s)  # t * psi(t)
    elif psi == "inverse_log":
        if eps0 >= 1:
            raise ValueError("psi = 1/(t log(1/t)) needs eps0 < 1")
        t_psi = lambda s: 1 / s
    elif psi == "lehto":
        prof = kmean if profile is None else profile
        t_psi = lambda s: 1 / prof(np.exp(-s))
    else:
        raise ValueError(f"psi must be one of {PSI_FAMILIES}")
    a, b = np.log(1 / eps0), np.log(1 / eps)
    count = max(1, int(np.ceil((b - a) / np.log(2))))
    edges = np.linspace(a, b, count + 1)
    I = float(np.sum(_shell_integrals(t_psi, edges)))
    if not np.isfinite(I) or I <= 0:
        raise ValueError(f"admissibility normaliser I(eps) = {I} is not in (0, inf)")
    # dA = t dt dtheta = t^2 ds dtheta, rho^2 t^2 = (t psi)^2 / I^2
    num = float(np.sum(_shell_integrals(lambda s: 2 * np.pi * kmean(np.exp(-s)) * t_psi(s) ** 2,
                                        edges)))
    return {"bound": num / I ** 2, "normaliser": I, "psi": psi, "eps": eps, "eps0": eps0}


def equicontinuity_bound(delta: float, modulus: float) -> float:
    """``(32 / delta) * exp(-2 pi / M)``."""
    if delta <= 0 or modulus <= 0:
        raise ValueError("delta and modulus must be positive")
    return 32.0 / delta * float(np.exp(-2 * np.pi / modulus))
