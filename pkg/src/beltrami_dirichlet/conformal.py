"""Conformal maps of polygonal Jordan domains onto the unit disk.

The raw map is Marshall's geodesic zipper: a square-root map opens the first
edge, then one slit map per vertex zips the remaining boundary onto the real
line, and a final square plus Moebius step lands in the disk.  Every step is
explicit, so derivatives follow by the chain rule and inverses step by step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import LinearRing, Point, Polygon

from .grid import GridSpec

MIN_VERTICES = 64
NORMALIZATIONS = ("positive_derivative", "marked_point")


class ConformalMapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JordanBoundary:
    """Positively oriented simple closed polygon with 0 strictly inside."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex).ravel()
        if v.size >= 2 and v[0] == v[-1]:
            v = v[:-1]
        if v.size < MIN_VERTICES:
            raise ConformalMapError(f"need at least {MIN_VERTICES} boundary samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ConformalMapError("boundary samples must be finite")
        coords = np.column_stack([v.real, v.imag])
        if not LinearRing(coords).is_simple:
            raise ConformalMapError("boundary polygon self-intersects")
        if signed_area(v) <= 0:
            raise ConformalMapError("boundary must be positively oriented")
        if not Polygon(coords).contains(Point(0.0, 0.0)):
            raise ConformalMapError("the origin must lie strictly inside the domain")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def m(self) -> int:
        return self.vertices.size

    @property
    def polygon(self) -> Polygon:
        return Polygon(np.column_stack([self.vertices.real, self.vertices.imag]))

    @property
    def radius(self) -> float:
        return float(np.abs(self.vertices).max())

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return shapely.contains_xy(self.polygon, z.real, z.imag)

    def mask(self, spec: GridSpec) -> np.ndarray:
        return self.contains(spec.z)

    def grid(self, n: int, padding: float = 0.2) -> GridSpec:
        return GridSpec.enclosing(self.vertices, n, padding)

    # constructors
    @classmethod
    def circle(cls, m: int = 512, radius: float = 1.0) -> "JordanBoundary":
        t = 2 * np.pi * np.arange(m) / m
        return cls(radius * np.exp(1j * t))

    @classmethod
    def ellipse(cls, a: float, b: float, m: int = 512) -> "JordanBoundary":
        t = 2 * np.pi * np.arange(m) / m
        return cls(a * np.cos(t) + 1j * b * np.sin(t))

    @classmethod
    def square(cls, m: int = 512, half_side: float = 1.0) -> "JordanBoundary":
        """Equal arc-length samples starting at the midpoint of the right side."""
        if m % 8:
            raise ConformalMapError("square sampling needs m divisible by 8")
        s = 8 * np.arange(m) / m  # perimeter parameter in units of half sides
        corners = half_side * np.array([1 - 1j, 1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
        pos = (s + 1) % 8
        side = (pos // 2).astype(int)
        frac = (pos % 2) / 2
        return cls(corners[side] + frac * (corners[side + 1] - corners[side]))

    @classmethod
    def from_csv(cls, path) -> "JordanBoundary":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0] + 1j * data[:, 1])


def signed_area(v: np.ndarray) -> float:
    x, y = v.real, v.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _slit_root(q: np.ndarray, c: float) -> np.ndarray:
    """Root of ``q**2 + c**2`` in the closed upper half plane, on q's side."""
    w = np.sqrt(q * q + c * c)
    flip = (w.real * q.real < 0) | ((q.real == 0) & (w.imag < 0))
    return np.where(flip, -w, w)


@dataclass(frozen=True, eq=False)
class _Zipper:
    z0: complex
    z1: complex
    inv_b: np.ndarray  # 1/b per slit step (0 when b is infinite)
    c: np.ndarray
    zeta: float
    sign: float

    def to_half_plane(self, z: np.ndarray):
        """Image in the upper half plane and its derivative."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (z - self.z1) / (z - self.z0)
            w = 1j * np.sqrt(u)
            dw = -(self.z1 - self.z0) / (z - self.z0) ** 2 / (2 * w)
        for ib, c in zip(self.inv_b, self.c):
            den = 1 - w * ib
            q = w / den
            dq = 1 / den ** 2
            w = _slit_root(q, c)
            dw = dw * dq * np.where(w != 0, q / np.where(w != 0, w, 1), 0)
        den = 1 - w / self.zeta
        q = w / den
        dw = dw / den ** 2
        w = self.sign * q * q
        dw = dw * self.sign * 2 * q
        return w, dw

    def from_half_plane(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex) * self.sign
        q = np.sqrt(w)
        q = np.where(q.imag < 0, -q, q)
        z = q / (1 + q / self.zeta)
        for ib, c in zip(self.inv_b[::-1], self.c[::-1]):
            q = np.sqrt(z * z - c * c)
            flip = (q.imag < 0) | ((q.imag == 0) & (q.real * z.real < 0))
            q = np.where(flip, -q, q)
            z = q / (1 + q * ib)
        u = -z * z
        return (self.z1 - u * self.z0) / (1 - u)


def _build_zipper(v: np.ndarray) -> tuple[_Zipper, np.ndarray]:
    """Zipper through the vertices plus the real images of all vertices."""
    z0, z1 = v[0], v[1]
    img = np.empty(v.size, dtype=complex)
    img[1:] = 1j * np.sqrt((v[1:] - z1) / (v[1:] - z0))
    img[0] = 0  # placeholder; the first vertex is tracked separately as zeta
    # the first vertex sits at infinity on the interior side of the real line
    zeta = -np.inf
    m = v.size
    inv_b = np.zeros(m - 2)
    cs = np.zeros(m - 2)
    for k in range(2, m):
        a = img[k]
        if not a.imag > 0:
            raise ConformalMapError(f"zipper lost vertex {k} (boundary too rough for the sampling)")
        r2 = abs(a) ** 2
        ib = a.real / r2
        c = r2 / a.imag
        inv_b[k - 2], cs[k - 2] = ib, c
        q = img / (1 - img * ib)
        new = _slit_root(q, c)
        # a processed vertex at 0 belongs to the interior side
        done = np.arange(m) < k
        done[0] = False
        new = np.where(done & (q == 0), -c, new)
        new[k] = 0
        new[done] = new[done].real
        img = new
        if np.isinf(zeta):
            zq = -1.0 / ib if ib != 0 else -np.inf
        else:
            zq = zeta / (1 - zeta * ib)
        zeta = float(_slit_root(np.array([zq], dtype=complex), c)[0].real) if np.isfinite(zq) else zq
    if not np.isfinite(zeta) or zeta == 0:
        raise ConformalMapError("degenerate zipper: first vertex image not finite")
    zip_ = _Zipper(z0, z1, inv_b, cs, zeta, 1.0)
    return zip_, img


@dataclass(frozen=True, eq=False)
class DiskMap:
    """Conformal map of a Jordan domain onto the unit disk with ``map(0) = 0``."""

    boundary: JordanBoundary
    normalization: str
    zipper: _Zipper
    origin_image: complex  # image of 0 in the upper half plane
    rotation: complex
    marked_index: int
    angles: np.ndarray  # circle angle of every vertex

    def _half_to_disk(self, w, dw):
        A = self.origin_image
        den = w - np.conj(A)
        W = self.rotation * (w - A) / den
        dW = self.rotation * (A - np.conj(A)) / den ** 2 * dw
        return W, dW

    def evaluate(self, z, with_derivative: bool = False):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            w, dw = self.zipper.to_half_plane(z)
            W, dW = self._half_to_disk(w, dw)
        # the zipper sends the first vertex to infinity, whose disk image is the rotation
        first = z == self.boundary.vertices[0]
        if np.any(first):
            W = np.where(first, self.rotation, W)
        return (W, dW) if with_derivative else W

    __call__ = evaluate

    def derivative(self, z):
        return self.evaluate(z, with_derivative=True)[1]

    def derivative_at_origin(self) -> complex:
        return complex(self.derivative(np.array([0j]))[0])

    def inverse(self, w, tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
        """Preimage of disk points: step-by-step inversion, then Newton polish."""
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) > 1 - 1e-6):
            raise ConformalMapError("inverse_map needs |w| <= 1 - 1e-6")
        A = self.origin_image
        t = w / self.rotation
        half = (A - np.conj(A) * t) / (1 - t)
        z = self.zipper.from_half_plane(half)
        for _ in range(max_iter):
            val, der = self.evaluate(z, with_derivative=True)
            step = (val - w) / der
            z = z - step
            if np.all(np.abs(step) <= tol * max(1.0, self.boundary.radius)):
                return z
        val = self.evaluate(z)
        if np.max(np.abs(val - w)) > 1e-8:
            raise ConformalMapError("Newton polish did not converge in 50 iterations")
        return z


def map_to_disk(boundary: JordanBoundary, normalization: str = "positive_derivative",
                marked_index: int = 0) -> DiskMap:
    if normalization not in NORMALIZATIONS:
        raise ConformalMapError(f"normalization must be one of {NORMALIZATIONS}")
    zipper, img = _build_zipper(boundary.vertices)
    # final Moebius step, then pick the sign that puts the interior in H
    q = img / (1 - img / zipper.zeta)
    half = q * q
    w0, dw0 = zipper.to_half_plane(np.array([0j]))
    sign = 1.0 if w0[0].imag > 0 else -1.0
    zipper = _Zipper(zipper.z0, zipper.z1, zipper.inv_b, zipper.c, zipper.zeta, sign)
    A = complex(sign * w0[0])
    half = sign * half.real
    half[0] = np.inf
    with np.errstate(invalid="ignore"):
        disk = np.where(np.isinf(half), 1.0, (half - A) / (half - np.conj(A)))
    dmap = DiskMap(boundary, normalization, zipper, A, 1.0, marked_index, np.zeros(0))
    if normalization == "positive_derivative":
        d = dmap.derivative_at_origin()
        rot = np.conj(d) / abs(d)
    else:
        rot = np.conj(disk[marked_index]) / abs(disk[marked_index])
    disk = disk * rot
    angles = np.unwrap(np.angle(disk))
    if angles[-1] < angles[0]:
        raise ConformalMapError("boundary correspondence runs backwards")
    return DiskMap(boundary, normalization, zipper, A, complex(rot), marked_index, angles)


def inverse_map(dmap: DiskMap, w):
    return dmap.inverse(w)


@dataclass(frozen=True)
class AngleTable:
    """Circle angle (unwrapped, starting in ``[-pi, pi)``) per boundary vertex."""

    angles: np.ndarray

    @property
    def total_increase(self) -> float:
        a = self.angles
        return float(a[-1] - a[0] + _wrap_step(a[0] - a[-1]))

    @property
    def monotone(self) -> bool:
        d = np.diff(np.append(self.angles, self.angles[0] + 2 * np.pi))
        return bool(np.all(d > 0))

    def wrapped(self) -> np.ndarray:
        return np.mod(self.angles, 2 * np.pi)


def _wrap_step(d: float) -> float:
    return float(np.mod(d, 2 * np.pi))


def boundary_correspondence(dmap: DiskMap) -> AngleTable:
    table = AngleTable(dmap.angles.copy())
    if not table.monotone:
        raise ConformalMapError("boundary correspondence is not strictly monotone")
    return table
