"""Integral constraints with a weight function Phi given as a table.

Tables store ``H = log Phi`` so that exponential weights do not overflow.  A
repeated abscissa encodes a jump.  Between nodes ``H`` is linear, except next
to a node where ``Phi = 0``; there ``Phi`` itself is linear.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .verdicts import (DEFAULT_THRESHOLDS, INCONCLUSIVE, SATISFIED, VIOLATED, CriteriaVerdict,
                       Thresholds, as_sampler, divergence_verdict)

CONDITIONS = ("derivative", "stieltjes", "weighted", "reciprocal", "inverse_log", "inverse")
CONDITION_LABELS = {
    "derivative": "int H'(t) dt / t",
    "stieltjes": "int dH(t) / t",
    "weighted": "int H(t) dt / t^2",
    "reciprocal": "int_0 H(1/t) dt",
    "inverse_log": "int d eta / H^-1(eta)",
    "inverse": "int d tau / (tau Phi^-1(tau))",
}
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
LOG_TAU_MAX = 690.0  # keep tau = Phi(t) representable


class PhiTableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PhiCondition:
    t: np.ndarray
    H: np.ndarray  # log Phi; -inf where Phi = 0
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).copy()
        H = np.asarray(self.H, dtype=float).copy()
        if t.ndim != 1 or t.shape != H.shape or t.size < 2:
            raise PhiTableError("Phi table needs matching 1-d arrays of length >= 2")
        if t[0] != 0 or np.any(np.diff(t) < 0) or np.any(np.isnan(H)):
            raise PhiTableError("Phi table abscissae must start at 0 and be non-decreasing")
        with np.errstate(invalid="ignore"):  # -inf - -inf where Phi = 0
            decreasing = np.any(np.diff(H) < 0)
        if decreasing:
            raise PhiTableError("Phi must be non-decreasing")
        if np.any((t[1:] == t[:-1])[1:] & (t[2:] == t[:-2])):
            raise PhiTableError("at most two table entries per abscissa")
        for a in (t, H):
            a.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "H", H)

    # constructors -----------------------------------------------------------
    @classmethod
    def from_log(cls, H_func, t_max: float = 2.0 ** 60, nodes: int = 4000,
                 label: str = "") -> "PhiCondition":
        t = np.concatenate([[0.0], np.geomspace(1e-6, t_max, nodes - 1)])
        with np.errstate(divide="ignore"):
            H = np.asarray(H_func(t), dtype=float)
        return cls(t, np.maximum.accumulate(H), label)

    @classmethod
    def from_function(cls, phi_func, **kw) -> "PhiCondition":
        with np.errstate(divide="ignore"):
            return cls.from_log(lambda t: np.log(phi_func(t)), **kw)

    @classmethod
    def exponential(cls) -> "PhiCondition":
        return cls.from_log(lambda t: t, label="exp(t)")

    @classmethod
    def power(cls, p: float = 2.0) -> "PhiCondition":
        with np.errstate(divide="ignore"):
            return cls.from_log(lambda t: p * np.log(t), label=f"t^{p:g}")

    @classmethod
    def from_csv(cls, path) -> "PhiCondition":
        """Two columns ``t,phi`` with a header row."""
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 2:
            raise PhiTableError("Phi table CSV needs exactly two columns t,phi")
        if np.any(data[:, 1] < 0):
            raise PhiTableError("Phi values must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(data[:, 0], np.log(data[:, 1]), Path(path).name)

    # evaluation -------------------------------------------------------------
    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def log_phi(self, x) -> np.ndarray:
        """``H`` at arbitrary points; beyond the table, linear in ``log t``."""
        x = np.asarray(x, dtype=float)
        t, H = self.t, self.H
        out = np.empty(x.shape)
        flat = x.ravel()
        res = out.ravel()
        inside = flat <= t[-1]
        # right-continuous: at a jump take the upper value
        idx = np.clip(np.searchsorted(t, flat[inside], side="right"), 1, t.size - 1)
        t0, t1, H0, H1 = t[idx - 1], t[idx], H[idx - 1], H[idx]
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            lam = np.where(t1 > t0, (flat[inside] - t0) / np.where(t1 > t0, t1 - t0, 1), 1.0)
            lin_H = H0 + lam * (H1 - H0)
            lin_phi = np.log((1 - lam) * np.exp(H0) + lam * np.exp(H1))
            res[inside] = np.where(np.isfinite(H0), lin_H, lin_phi)
            outside = ~inside
            if outside.any():
                slope = self._tail_log_slope()
                res[outside] = H[-1] + slope * np.log(flat[outside] / t[-1])
        return out

    def _tail_log_slope(self) -> float:
        t, H = self.t, self.H
        j = t.size - 2
        while j > 0 and t[j] == t[-1]:
            j -= 1
        if not np.isfinite(H[j]) or t[j] <= 0:
            return 0.0
        return float((H[-1] - H[j]) / np.log(t[-1] / t[j]))

    def phi(self, x) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_phi(x))

    def is_convex(self, rtol: float = 1e-9) -> bool:
        """Discrete convexity of Phi on the table (slopes non-decreasing, no jumps)."""
        t, H = self.t, self.H
        if np.any(np.diff(t) == 0):
            return False
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # log of the secant slope, stable for huge H
            hi = H[1:]
            gap = np.where(np.isfinite(H[:-1]), np.exp(H[:-1] - hi), 0.0)
            log_slope = np.where(np.isfinite(hi), hi + np.log1p(-gap), -np.inf) - np.log(np.diff(t))
        ls = np.where(np.isnan(log_slope), -np.inf, log_slope)
        tol = rtol * np.maximum(1.0, np.abs(np.where(np.isfinite(ls[1:]), ls[1:], 0.0)))
        return bool(np.all((ls[:-1] == -np.inf) | (ls[1:] >= ls[:-1] - tol)))

    def to_dict(self) -> dict:
        return {"label": self.label, "nodes": int(self.t.size), "t_max": self.t_max,
                "convex": self.is_convex()}


# --- inverse ------------------------------------------------------------------

def _log_inverse(cond: PhiCondition, sigma) -> np.ndarray:
    """``inf { t : H(t) >= sigma }``, ``inf`` when the table never gets there."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    t, H = cond.t, cond.H
    out = np.empty(sigma.shape)
    idx = np.searchsorted(H, sigma, side="left")  # first node with H >= sigma
    for k, (s, i) in enumerate(zip(sigma, idx)):
        if i == 0:
            out[k] = 0.0
        elif i == t.size:
            slope = cond._tail_log_slope()
            out[k] = t[-1] * np.exp((s - H[-1]) / slope) if slope > 0 else np.inf
        else:
            t0, t1, H0, H1 = t[i - 1], t[i], H[i - 1], H[i]
            if t1 == t0:
                out[k] = t1
            elif np.isfinite(H0):
                out[k] = t0 + (s - H0) / (H1 - H0) * (t1 - t0)
            else:
                out[k] = t0 + np.exp(s - H1) * (t1 - t0)
    return out


def phi_inverse(cond: PhiCondition, tau):
    """``inf { t : Phi(t) >= tau }`` with ``inf`` of the empty set equal to infinity."""
    tau = np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore"):
        sigma = np.where(tau > 0, np.log(np.where(tau > 0, tau, 1)), -np.inf)
    out = _log_inverse(cond, sigma.ravel()).reshape(sigma.shape)
    return out if out.ndim else float(out)


# --- the six divergence conditions -----------------------------------------

def _start(cond: PhiCondition) -> float:
    """Lower cutoff: past the last abscissa where Phi <= 1, and at least 1."""
    t, H = cond.t, cond.H
    low = t[H <= 0]
    return float(max(1.0, 2 * low.max() if low.size else 1.0))


def _dyadic(a: float, b: float, shells: int = 4000) -> np.ndarray:
    if not b > a:
        return np.array([a])
    count = min(shells, max(1, int(np.floor(np.log2(b / a)))))
    return a * 2.0 ** np.arange(count + 1)


def _segment_pieces(cond: PhiCondition, edges: np.ndarray, kind: str) -> np.ndarray:
    """Exact shell integrals over the piecewise-linear ``H`` for the first three conditions."""
    t, H = cond.t, cond.H
    out = np.zeros(edges.size - 1)
    seg_t0, seg_t1, seg_H0, seg_H1 = t[:-1], t[1:], H[:-1], H[1:]
    jumps = (seg_t1 == seg_t0) & np.isfinite(seg_H0)
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        lo = np.maximum(seg_t0, a)
        hi = np.minimum(seg_t1, b)
        live = (hi > lo) & np.isfinite(seg_H0)
        slope = (seg_H1[live] - seg_H0[live]) / (seg_t1[live] - seg_t0[live])
        l, h = lo[live], hi[live]
        if kind in ("derivative", "stieltjes"):
            val = np.sum(slope * np.log(h / l))
            if kind == "stieltjes":
                at = jumps & (seg_t0 >= a) & (seg_t0 < b)
                val += np.sum((seg_H1[at] - seg_H0[at]) / seg_t0[at])
        else:  # weighted: int (H0 + slope (x - t0)) / x^2
            c0 = seg_H0[live] - slope * seg_t0[live]
            val = np.sum(c0 * (1 / l - 1 / h) + slope * np.log(h / l))
        out[k] = val
    return out


def _gauss_pieces(func, edges: np.ndarray) -> np.ndarray:
    a, b = edges[:-1], edges[1:]
    x = 0.5 * (b - a)[:, None] * (_GL_X[None, :] + 1) + a[:, None]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        vals = func(x.ravel()).reshape(x.shape)
    return 0.5 * (b - a) * np.sum(_GL_W[None, :] * vals, axis=1)


def condition_increments(cond: PhiCondition, name: str) -> np.ndarray:
    """Dyadic-shell pieces of one condition's integral, each in its own variable."""
    delta = _start(cond)
    t_top = cond.t_max
    if name in ("derivative", "stieltjes", "weighted"):
        return _segment_pieces(cond, _dyadic(delta, t_top), name)
    if name == "reciprocal":
        # t runs down from 1/delta to 1/t_top; shells [d/2^(k+1), d/2^k]
        top = 1 / delta
        edges = top * 0.5 ** np.arange(_dyadic(delta, t_top).size)
        pieces = _gauss_pieces(lambda x: cond.log_phi(1 / x), edges[::-1])
        return pieces[::-1]
    eta0 = max(1.0, float(cond.log_phi(delta)))
    if name == "inverse_log":
        eta_top = float(cond.H[-1])
        return _gauss_pieces(lambda e: 1 / _log_inverse(cond, e), _dyadic(eta0, eta_top))
    if name == "inverse":
        tau0 = np.exp(eta0)
        tau_top = np.exp(min(float(cond.H[-1]), LOG_TAU_MAX))
        return _gauss_pieces(lambda x: 1 / (x * _log_inverse(cond, np.log(x))),
                             _dyadic(tau0, tau_top))
    raise ValueError(f"unknown condition {name!r}")


def phi_condition_tests(cond: PhiCondition, th: Thresholds = DEFAULT_THRESHOLDS) -> dict:
    """Each condition's integral is tested for divergence (divergent = satisfied).

    For convex Phi the six must agree; disagreement is reported as a
    resolution failure with an inconclusive overall verdict.
    """
    verdicts = {}
    for name in CONDITIONS:
        inc = condition_increments(cond, name)
        kind, ev = divergence_verdict(inc, th)
        ev["integral"] = CONDITION_LABELS[name]
        verdicts[name] = CriteriaVerdict(
            name, {"divergent": SATISFIED, "convergent": VIOLATED}.get(kind, INCONCLUSIVE), ev)
    distinct = {v.verdict for v in verdicts.values()}
    convex = cond.is_convex()
    agree = len(distinct) == 1
    if agree:
        overall = distinct.pop()
    else:
        overall = INCONCLUSIVE
    return {"conditions": verdicts, "convex": convex, "agree": agree,
            "resolution_failure": bool(convex and not agree), "overall": overall}


# --- convexification --------------------------------------------------------

def tangent_splice(cond: PhiCondition, T: float) -> PhiCondition:
    """Zero on ``[0, T]``, then the flattest line from ``(T, 0)`` touching Phi, then Phi."""
    t, H = cond.t, cond.H
    cand = t > T
    if not cand.any():
        raise PhiTableError("splice point lies beyond the table")
    with np.errstate(divide="ignore"):
        log_ratio = np.where(cand, H - np.log(np.where(cand, t - T, 1)), np.inf)
    j = int(np.argmin(log_ratio))
    t_star, log_slope = t[j], log_ratio[j]
    line_t = np.linspace(T, t_star, 64)[1:-1]
    with np.errstate(divide="ignore"):
        line_H = log_slope + np.log(line_t - T)
    head_t = np.array([0.0, T]) if T > 0 else np.array([0.0])
    new_t = np.concatenate([head_t, line_t, t[j:]])
    new_H = np.concatenate([np.full(head_t.size, -np.inf), line_H, H[j:]])
    label = f"{cond.label} spliced at T={T:g}" if cond.label else f"spliced at T={T:g}"
    return PhiCondition(new_t, new_H, label)


# --- integral budget ---------------------------------------------------------

def _log_sum(log_vals: np.ndarray, log_w: np.ndarray, axis=None) -> np.ndarray:
    a = log_vals + log_w
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def phi_integral_budget(K, cond: PhiCondition, mask=None, z0: complex = 0j, delta: float = 0.5,
                        th: Thresholds = DEFAULT_THRESHOLDS, r_min: float = 1e-12) -> CriteriaVerdict:
    """Integral of ``Phi(K)``.

    On a grid field: node quadrature over ``mask`` (non-finite ``K`` capped at
    the largest finite value) at full and half resolution; satisfied when the
    two agree within 5%.  On a callable: dyadic shells around ``z0`` down to
    ``r_min`` tested for divergence (local integrability near ``z0``).
    """
    from ..coefficients import DilatationField
    from ..grid import RealField

    if isinstance(K, (DilatationField, RealField)):
        vals = np.array(K.values, dtype=float)
        bad = ~np.isfinite(vals)
        cap = float(vals[~bad].max()) if (~bad).any() else 1.0
        vals[bad] = cap
        m = np.ones(vals.shape, bool) if mask is None else np.asarray(mask, bool)
        h = K.spec.step
        logs = []
        for stride in (1, 2):
            v = vals[::stride, ::stride][m[::stride, ::stride]]
            logs.append(float(_log_sum(cond.log_phi(v), np.full(v.shape, 2 * np.log(stride * h)))))
        fine, coarse = logs
        if not np.isfinite(fine) or fine > LOG_TAU_MAX:
            verdict = VIOLATED
        else:
            verdict = SATISFIED if abs(np.expm1(coarse - fine)) <= 0.05 else INCONCLUSIVE
        value = float(np.exp(fine)) if fine <= LOG_TAU_MAX else float("inf")
        return CriteriaVerdict("phi_budget", verdict,
                               {"value": value, "log_value": fine, "log_value_half_resolution": coarse,
                                "cap": cap, "phi": cond.label})
    su = as_sampler(K)
    count = max(1, min(64, int(np.floor(np.log2(delta / r_min)))))
    edges_s = np.log(1 / delta) + np.log(2) * np.arange(count + 1)
    n_ang = 256
    th_ = 2 * np.pi * np.arange(n_ang) / n_ang
    log_pieces = []
    for a, b in zip(edges_s[:-1], edges_s[1:]):
        s = 0.5 * (b - a) * (_GL_X + 1) + a
        r = np.exp(-s)
        pts = z0 + r[:, None] * np.exp(1j * th_)[None, :]
        with np.errstate(over="ignore", invalid="ignore"):
            Hv = cond.log_phi(su(pts))
        # dA = r^2 ds dtheta
        lw = (np.log(0.5 * (b - a) * _GL_W) + 2 * np.log(r))[:, None] + np.log(2 * np.pi / n_ang)
        log_pieces.append(float(_log_sum(Hv, np.broadcast_to(lw, Hv.shape))))
    log_pieces = np.array(log_pieces)
    with np.errstate(over="ignore"):
        inc = np.where(log_pieces > LOG_TAU_MAX, np.inf, np.exp(log_pieces))
    kind, ev = divergence_verdict(inc, th)
    verdict = {"divergent": VIOLATED, "convergent": SATISFIED}.get(kind, INCONCLUSIVE)
    ev["log_shell_values"] = log_pieces
    ev["phi"] = cond.label
    total = float(np.sum(inc))
    ev["value"] = total
    return CriteriaVerdict("phi_budget", verdict, ev, complex(z0))


def exponential_integrability(K, alphas=(1.0, 0.5, 0.25), **kw) -> CriteriaVerdict:
    """``exp(alpha K)`` integrable for some listed ``alpha``."""
    results = {}
    for a in alphas:
        cond = PhiCondition.from_log(lambda t, a=a: a * t, label=f"exp({a:g} t)")
        results[a] = phi_integral_budget(K, cond, **kw)
    verdicts = [r.verdict for r in results.values()]
    if SATISFIED in verdicts:
        verdict = SATISFIED
    elif all(v == VIOLATED for v in verdicts):
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    best = next((a for a, r in results.items() if r.verdict == SATISFIED), None)
    ev = {"alpha": best, "per_alpha": {str(a): r.to_dict() for a, r in results.items()}}
    return CriteriaVerdict("exp_integrability", verdict, ev, kw.get("z0"))
