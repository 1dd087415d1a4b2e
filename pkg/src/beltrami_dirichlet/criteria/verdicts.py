"""Verdicts, trend fits and samplers shared by the criteria tests."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..coefficients import DilatationField
from ..grid import GridSpec, RealField, sample_grid

SATISFIED = "satisfied"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Thresholds:
    bounded_slope: float = 0.05  # log-slope at or below: bounded
    growth_slope: float = 0.5  # log-slope at or above: unbounded
    divergent_power: float = 1.05  # increments ~ k^-q with q at or below: divergent
    convergent_power: float = 1.5
    ratio_vanishing: float = -0.5  # log-ratio slope at or below: ratio -> 0
    ratio_stalled: float = -0.05

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_THRESHOLDS = Thresholds()
MIN_TREND_POINTS = 3  # fewer samples than this never decide a trend


@dataclass
class CriteriaVerdict:
    test: str
    verdict: str
    evidence: dict = field(default_factory=dict)
    point: complex | None = None

    def to_dict(self) -> dict:
        out = {"test": self.test, "verdict": self.verdict, "evidence": _jsonable(self.evidence)}
        if self.point is not None:
            out["point"] = [float(np.real(self.point)), float(np.imag(self.point))]
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# --- trend fits -------------------------------------------------------------

def log_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ``log y`` against ``log x``; ``inf`` for non-finite data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        return float("inf")
    if np.all(y <= 0):
        return float("-inf")
    keep = y > 0
    if keep.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def boundedness_verdict(x, y, th: Thresholds = DEFAULT_THRESHOLDS, tiny: float = 1e-12):
    """Bounded / growing trend of ``y`` as ``x`` grows (typically ``x = 1/eps``)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        return VIOLATED, float("inf")
    if np.max(np.abs(y)) <= tiny:
        return SATISFIED, 0.0
    if y.size < MIN_TREND_POINTS:
        return INCONCLUSIVE, float("nan")
    slope = log_slope(x, y)
    if slope <= th.bounded_slope:
        return SATISFIED, slope
    if slope >= th.growth_slope:
        return VIOLATED, slope
    return INCONCLUSIVE, slope


def divergence_verdict(increments, th: Thresholds = DEFAULT_THRESHOLDS) -> tuple[str, dict]:
    """Classify the partial sums of dyadic-shell increments as divergent or not.

    Fits ``increment_k ~ k**-q`` over the second half of the sweep; ``q`` at or
    below ``divergent_power`` means the series diverges, at or above
    ``convergent_power`` (which covers geometric decay) that it converges.
    """
    inc = np.asarray(increments, dtype=float)
    ev = {"partial_sums": np.cumsum(inc).tolist(), "shells": int(inc.size)}
    if inc.size == 0:
        return INCONCLUSIVE, ev
    if np.any(~np.isfinite(inc)):
        ev["model"] = "infinite"
        return "divergent", ev
    if inc.size < MIN_TREND_POINTS:
        ev["model"] = "too few shells"
        return INCONCLUSIVE, ev
    k = np.arange(1, inc.size + 1, dtype=float)
    tail = slice(inc.size // 2, None)
    kt, it = k[tail], inc[tail]
    if it.size < 2:
        kt, it = k, inc
    if np.all(it <= 0):
        ev["model"] = "terminates"
        return "convergent", ev
    q = -log_slope(kt, np.where(it > 0, it, np.min(it[it > 0]) * 1e-300))
    ev["power"] = q
    if q <= th.divergent_power:
        ev["model"] = "power<=1"
        return "divergent", ev
    if q >= th.convergent_power:
        ev["model"] = "fast decay"
        return "convergent", ev
    ev["model"] = "borderline"
    return INCONCLUSIVE, ev


def ratio_verdict(base, ratio, th: Thresholds = DEFAULT_THRESHOLDS) -> tuple[str, float]:
    """Does ``ratio -> 0`` as ``base -> inf``?  Slope of ``log ratio`` vs ``log base``."""
    ratio = np.asarray(ratio, dtype=float)
    if not np.all(np.isfinite(ratio)):
        return VIOLATED, float("inf")
    if ratio.size < MIN_TREND_POINTS:
        return INCONCLUSIVE, float("nan")
    slope = log_slope(base, ratio)
    if slope <= th.ratio_vanishing:
        return SATISFIED, slope
    if slope >= th.ratio_stalled:
        return VIOLATED, slope
    return INCONCLUSIVE, slope


def combine(verdicts) -> str:
    """Per-test verdict over many points: satisfied everywhere, violated somewhere."""
    vs = [v for v in verdicts if v != NOT_APPLICABLE]
    if not vs:
        return NOT_APPLICABLE
    if all(v == SATISFIED for v in vs):
        return SATISFIED
    if any(v == VIOLATED for v in vs):
        return VIOLATED
    return INCONCLUSIVE


# --- samplers ---------------------------------------------------------------

DEEP_RADIUS = 1e-12
GRID_RADIUS_CELLS = 4


@dataclass(frozen=True, eq=False)
class Sampler:
    """Real function of ``z`` plus the smallest radius a sweep may reach."""

    func: Callable
    min_radius: float
    spec: GridSpec | None = None
    degenerate: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))  # capped nodes
    filled: bool = False  # grid field extended by a constant beyond its edge

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=float)

    def sweep_floor(self, z0: complex, reach: float) -> float:
        """Smallest useful radius at ``z0``: beyond the capped nodes within ``reach``.

        Discs inside a blob of capped nodes only see the cap, so sweeps stop
        at twice the blob's extent.
        """
        if self.degenerate.size == 0:
            return self.min_radius
        d = np.abs(self.degenerate - z0)
        d = d[d <= reach]
        return self.min_radius if d.size == 0 else max(self.min_radius, 2 * float(d.max()))

    def inside_grid(self, z0: complex, radius: float) -> bool:
        if self.spec is None or self.filled:
            return True
        return bool(self.spec.contains(np.array([z0 + radius, z0 - radius,
                                                 z0 + 1j * radius, z0 - 1j * radius])).all())


def as_sampler(source, min_radius: float | None = None, fill: float | None = None) -> Sampler:
    """Wrap a grid field (bilinear, non-finite capped) or a callable.

    ``fill`` extends a grid field by a constant outside the grid, e.g. a
    dilatation whose coefficients vanish off the domain.
    """
    if isinstance(source, Sampler):
        return source
    if isinstance(source, (RealField, DilatationField)):
        spec = source.spec
        vals = np.array(source.values, dtype=float)
        bad = ~np.isfinite(vals)
        if bad.any():
            fin = vals[~bad]
            vals[bad] = fin.max() if fin.size else 1.0
        r = GRID_RADIUS_CELLS * spec.step if min_radius is None else min_radius
        if fill is None:
            return Sampler(lambda z: sample_grid(spec, vals, z), r, spec, spec.z[bad])

        def filled(z):
            z = np.asarray(z, dtype=complex)
            return np.where(spec.contains(z), sample_grid(spec, vals, z), fill)
        return Sampler(filled, r, spec, spec.z[bad], True)
    if callable(source):
        return Sampler(source, DEEP_RADIUS if min_radius is None else min_radius)
    raise TypeError(f"cannot sample {type(source).__name__}")


def dyadic_radii(start: float, stop: float, limit: int = 64) -> np.ndarray:
    """``start, start/2, ...`` down to ``stop`` (inclusive), at most ``limit`` values."""
    if stop > start:
        return np.array([start])
    count = min(limit, int(np.floor(np.log2(start / stop))) + 1)
    return start * 0.5 ** np.arange(count)
