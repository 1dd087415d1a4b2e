"""Mean oscillation over discs: BMO estimates, pointwise FMO tests and the
annulus integral bound for FMO functions."""
from __future__ import annotations

import numpy as np

from .verdicts import (DEFAULT_THRESHOLDS, INCONCLUSIVE, SATISFIED, CriteriaVerdict, Thresholds,
                       as_sampler, boundedness_verdict, dyadic_radii)

_R_NODES, _R_WEIGHTS = np.polynomial.legendre.leggauss(32)
N_ANGLES = 64


def _disc_nodes(centers: np.ndarray, radius: float):
    """Polar quadrature nodes and area weights (summing to 1) for discs."""
    r = 0.5 * radius * (_R_NODES + 1)
    wr = 0.5 * radius * _R_WEIGHTS * r
    th = 2 * np.pi * (np.arange(N_ANGLES) + 0.5) / N_ANGLES
    offs = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = np.repeat(wr, N_ANGLES) * (2 * np.pi / N_ANGLES) / (np.pi * radius ** 2)
    return centers[:, None] + offs[None, :], w


def disc_stats(u, centers, radius: float, centering=None):
    """Means ``u_B`` and mean oscillations ``avg |u - c|`` over discs.

    ``c`` is the disc mean unless ``centering`` (one value per disc) is given.
    """
    su = as_sampler(u)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    pts, w = _disc_nodes(centers, radius)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = su(pts)
        mean = vals @ w
        c = mean if centering is None else np.asarray(centering, dtype=float)
        osc = np.abs(vals - c[:, None]) @ w
    return mean, osc


def mean_oscillation(u, z0: complex, radius: float) -> float:
    return float(disc_stats(u, [z0], radius)[1][0])


def default_disc_family(domain_radius: float, min_radius: float, max_discs: int = 1024):
    """Dyadic scales; centres on a square lattice (spacing tied to the scale) inside the domain."""
    family = []
    for eps in dyadic_radii(domain_radius / 4, min_radius):
        spacing = max(eps, 2 * domain_radius / np.sqrt(max_discs))
        k = int(np.floor((domain_radius - eps) / spacing))
        g = spacing * np.arange(-k, k + 1)
        cz = (g[None, :] + 1j * g[:, None]).ravel()
        cz = cz[np.abs(cz) + eps <= domain_radius]
        family.append((eps, cz))
    return family


def bmo_profile(u, family=None, domain_radius: float = 1.0) -> list:
    su = as_sampler(u)
    if family is None:
        family = default_disc_family(domain_radius, su.min_radius)
    if not family:
        raise ValueError("empty disc family")
    out = []
    for eps, centers in family:
        if len(centers) == 0:
            continue
        _, osc = disc_stats(su, centers, eps)
        out.append((float(eps), float(np.max(osc))))
    if not out:
        raise ValueError("empty disc family")
    return out


def bmo_norm_estimate(u, family=None, domain_radius: float = 1.0) -> float:
    """Largest mean oscillation over a dyadic disc family inside the domain."""
    return max(o for _, o in bmo_profile(u, family, domain_radius))


def fmo_test(u, z0: complex, eps_max: float = 0.25, centering=None,
             th: Thresholds = DEFAULT_THRESHOLDS, mask_contains=None) -> CriteriaVerdict:
    """Finite mean oscillation at ``z0``: is ``avg_B |u - u_B|`` bounded as ``eps -> 0``?

    Evidence also carries the bounded-means sufficient test and, when a
    ``centering(eps)`` callable is supplied, the oscillation about it.
    """
    su = as_sampler(u)
    if mask_contains is not None and not mask_contains(z0):
        raise ValueError("z0 must lie in the closure of the domain")
    radii = dyadic_radii(eps_max, su.sweep_floor(z0, eps_max))
    means, oscs = [], []
    for eps in radii:
        m, o = disc_stats(su, [z0], eps)
        means.append(float(m[0]))
        oscs.append(float(o[0]))
    verdict, slope = boundedness_verdict(1 / radii, oscs, th)
    ev = {"radii": radii, "mean_oscillation": oscs, "fitted_log_slope": slope,
          "disc_means": means}
    mv, mslope = boundedness_verdict(1 / radii, np.abs(means), th)
    # bounded means only suffice; growth says nothing about FMO
    ev["bounded_means"] = {"verdict": SATISFIED if mv == SATISFIED else INCONCLUSIVE,
                           "fitted_log_slope": mslope}
    if centering is not None:
        dev = [float(disc_stats(su, [z0], e, [centering(e)])[1][0]) for e in radii]
        cv, cslope = boundedness_verdict(1 / radii, dev, th)
        ev["centered"] = {"verdict": SATISFIED if cv == SATISFIED else INCONCLUSIVE,
                          "deviation": dev, "fitted_log_slope": cslope}
    return CriteriaVerdict("fmo", verdict, ev, complex(z0))


_S_NODES, _S_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _angular_total(su, z0, r: np.ndarray, n_angles: int = 256) -> np.ndarray:
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    pts = z0 + r[:, None] * np.exp(1j * th)[None, :]
    with np.errstate(invalid="ignore", over="ignore"):
        return su(pts).sum(axis=1) * (2 * np.pi / n_angles)


def fmo_annulus_bound_check(u, eps_sweep=None, z0: complex = 0j) -> dict:
    """``I(eps) = int_{eps<|z|<1/e} u / (|z| log(1/|z|))^2`` against ``log log(1/eps)``.

    In ``s = log(1/|z|)`` the integral is ``int_1^{log(1/eps)} U(e^-s) / s^2 ds``
    with ``U`` the integral of ``u`` over the circle.  Reports the ratio table
    and the least-squares constant ``C`` in ``I ~ C log log(1/eps)``.
    """
    su = as_sampler(u)
    if eps_sweep is None:
        eps_sweep = dyadic_radii(np.exp(-1) / 2, max(su.min_radius, 1e-300))
    eps_sweep = np.sort(np.asarray(eps_sweep, dtype=float))[::-1]
    if np.any(eps_sweep >= np.exp(-1)):
        raise ValueError("annulus sweep needs eps < 1/e")
    edges = np.concatenate([[1.0], np.log(1 / eps_sweep)])
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * (_S_NODES + 1) + a
        U = _angular_total(su, z0, np.exp(-s))
        pieces.append(0.5 * (b - a) * float(np.sum(_S_WEIGHTS * U / s ** 2)))
    I = np.cumsum(pieces)
    ll = np.log(np.log(1 / eps_sweep))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ll > 0, I / ll, np.nan)
    use = ll >= 1
    if use.sum() >= 2:
        C = float(np.polyfit(ll[use], I[use], 1)[0])
    else:
        C = float("nan")
    tail = ratio[np.isfinite(ratio)][-3:]
    stable = bool(tail.size == 3 and np.ptp(tail) <= 0.05 * max(abs(tail[-1]), 1e-300))
    return {"eps": eps_sweep, "integral": I, "loglog": ll, "ratio": ratio,
            "fitted_constant": C, "ratio_stabilizes": stable}
