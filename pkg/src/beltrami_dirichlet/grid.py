"""Uniform node-centred grids over a square, complex fields living on them,
Wirtinger derivatives and the chordal metric of the Riemann sphere.

Array convention: ``values[j, i]`` is the sample at ``x_i + 1j * y_j``; rows
run along ``y``.  Node ``i = n // 2`` sits exactly on the centre.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

import numpy as np
from scipy.ndimage import map_coordinates

MIN_SAMPLES = 16


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Square grid of ``n x n`` nodes covering ``[c - w, c + w)`` per axis."""

    center: complex = 0j
    half_width: float = 1.0
    n: int = 64

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "half_width", float(self.half_width))
        # the centre node n//2 sits at the centre only for even n
        if self.n < MIN_SAMPLES or self.n % 2:
            raise GridError(f"n must be even and >= {MIN_SAMPLES}, got {self.n}")
        if not self.half_width > 0:
            raise GridError("half_width must be positive")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_area(self) -> float:
        return self.step ** 2

    @cached_property
    def x(self) -> np.ndarray:
        return self.center.real - self.half_width + self.step * np.arange(self.n)

    @cached_property
    def y(self) -> np.ndarray:
        return self.center.imag - self.half_width + self.step * np.arange(self.n)

    @cached_property
    def z(self) -> np.ndarray:
        zz = self.x[None, :] + 1j * self.y[:, None]
        zz.flags.writeable = False
        return zz

    @classmethod
    def enclosing(cls, points, n: int, padding: float = 0.2) -> "GridSpec":
        """Grid centred at the origin containing ``points`` with relative padding."""
        if padding < 0.1:
            raise GridError("padding must be at least 10%")
        radius = float(np.max(np.abs(np.asarray(points))))
        return cls(0j, radius * (1.0 + padding), n)

    def index_of(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Fractional (row, col) coordinates of points ``z``."""
        z = np.asarray(z, dtype=complex)
        col = (z.real - self.x[0]) / self.step
        row = (z.imag - self.y[0]) / self.step
        return row, col

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        row, col = self.index_of(z)
        lo, hi = margin, self.n - 1 - margin
        return (row >= lo) & (row <= hi) & (col >= lo) & (col <= hi)

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag],
                "half_width": self.half_width, "n": self.n}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ComplexField:
    spec: GridSpec
    values: np.ndarray
    extended: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.spec.n, self.spec.n):
            raise GridError(f"values must have shape {(self.spec.n,) * 2}, got {v.shape}")
        if not self.extended and not np.all(np.isfinite(v)):
            raise GridError("non-finite samples in a field not flagged as extended")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, spec: GridSpec, func) -> "ComplexField":
        return cls(spec, func(spec.z))

    def __add__(self, other):
        return ComplexField(self.spec, self.values + _vals(other))

    def __sub__(self, other):
        return ComplexField(self.spec, self.values - _vals(other))

    def __mul__(self, other):
        return ComplexField(self.spec, self.values * _vals(other))

    __rmul__ = __mul__

    def conj(self) -> "ComplexField":
        return ComplexField(self.spec, np.conj(self.values))

    def sample(self, z, order: int = 1) -> np.ndarray:
        """Interpolate at arbitrary points (bilinear by default)."""
        return sample_grid(self.spec, self.values, z, order=order)


@dataclass(frozen=True, eq=False)
class RealField:
    """Real (possibly extended-real) samples on a grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.n, self.spec.n):
            raise GridError(f"values must have shape {(self.spec.n,) * 2}, got {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, spec: GridSpec, func) -> "RealField":
        return cls(spec, func(spec.z))

    def sample(self, z, order: int = 1) -> np.ndarray:
        return sample_grid(self.spec, self.values, z, order=order)


def _vals(other):
    return other.values if isinstance(other, (ComplexField, RealField)) else other


def sample_grid(spec: GridSpec, values: np.ndarray, z, order: int = 1) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    row, col = spec.index_of(z.ravel())
    coords = np.vstack([row, col])
    if np.iscomplexobj(values):
        out = (map_coordinates(values.real, coords, order=order, mode="nearest")
               + 1j * map_coordinates(values.imag, coords, order=order, mode="nearest"))
    else:
        out = map_coordinates(values, coords, order=order, mode="nearest")
    return out.reshape(z.shape)


def wirtinger_derivatives(field: ComplexField) -> tuple[ComplexField, ComplexField]:
    """Return ``(d/dz, d/dzbar)`` by second-order finite differences.

    Centred differences in the interior, one-sided second-order stencils on
    the outer frame.
    """
    if field.spec.n < MIN_SAMPLES:
        raise GridError("grid too small for finite differences")
    v = field.values
    h = field.spec.step
    dx = np.gradient(v, h, axis=1, edge_order=2)
    dy = np.gradient(v, h, axis=0, edge_order=2)
    return (ComplexField(field.spec, 0.5 * (dx - 1j * dy), field.extended),
            ComplexField(field.spec, 0.5 * (dx + 1j * dy), field.extended))


# --- Riemann sphere ---------------------------------------------------------

@dataclass(frozen=True)
class SphericalPoint:
    """A point of the extended plane; ``value is None`` means infinity."""

    value: complex | None

    @classmethod
    def infinity(cls) -> "SphericalPoint":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None


INFINITY = SphericalPoint.infinity()

PointLike = Union[SphericalPoint, complex, float, int]


def _as_point(p: PointLike) -> SphericalPoint:
    if isinstance(p, SphericalPoint):
        return p
    return SphericalPoint(complex(p))


def spherical_distance(a: PointLike, b: PointLike) -> float:
    a, b = _as_point(a), _as_point(b)
    if a.is_infinite and b.is_infinite:
        return 0.0
    if a.is_infinite:
        a, b = b, a
    if b.is_infinite:
        return 1.0 / np.sqrt(1.0 + abs(a.value) ** 2)
    return abs(a.value - b.value) / (np.sqrt(1.0 + abs(a.value) ** 2)
                                     * np.sqrt(1.0 + abs(b.value) ** 2))


def chordal_distance(a, b) -> np.ndarray:
    """Vectorised chordal distance between arrays of finite points."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.abs(a - b) / (np.sqrt(1.0 + np.abs(a) ** 2) * np.sqrt(1.0 + np.abs(b) ** 2))


def spherical_diameter(points: Iterable[PointLike], chunk: int = 2048) -> float:
    pts = [_as_point(p) for p in points]
    if not pts:
        raise ValueError("spherical diameter of an empty set")
    finite = np.array([p.value for p in pts if not p.is_infinite], dtype=complex)
    best = 0.0
    if len(finite) < len(pts) and len(finite):
        best = float(np.max(1.0 / np.sqrt(1.0 + np.abs(finite) ** 2)))
    for start in range(0, len(finite), chunk):
        block = finite[start:start + chunk]
        d = chordal_distance(block[:, None], finite[None, :])
        best = max(best, float(d.max()))
    return best
