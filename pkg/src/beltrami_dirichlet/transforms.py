"""Singular integral operators on grids and the Schwarz integral on the circle.

The Cauchy transform is an aperiodic discrete convolution with the
cell-averaged kernel ``1/(pi z)`` (zero padded FFT).  The Beurling transform
uses the Fourier multiplier ``conj(xi)/xi`` on a grid padded by two per axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import ComplexField, GridSpec

PAD = 2
_NEAR_CELLS = 8.0


class SupportError(ValueError):
    pass


class ConstantAnalyticError(ValueError):
    pass


def _check_support(values: np.ndarray) -> None:
    frame = np.concatenate([values[0], values[-1], values[:, 0], values[:, -1]])
    if np.any(frame != 0):
        raise SupportError("density support touches the grid edge")


# --- cell-averaged kernels --------------------------------------------------

def _corner_sum(F, d: np.ndarray, h: float) -> np.ndarray:
    x, y = d.real, d.imag
    a, b, c, e = x - h / 2, x + h / 2, y - h / 2, y + h / 2
    return F(b, e) - F(a, e) - F(b, c) + F(a, c)


def _inv_antiderivative(x, y):
    # d^2/dxdy of this is 1/(x + iy)
    r2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        logr2 = np.where(r2 > 0, np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
        xt = np.where(x != 0, x * np.arctan(y / np.where(x != 0, x, 1.0)), 0.0)
        yt = np.where(y != 0, y * np.arctan(x / np.where(y != 0, y, 1.0)), 0.0)
    return (0.5 * y * logr2 + xt) - 1j * (0.5 * x * logr2 + yt)


def _inv_square_antiderivative(x, y):
    # d^2/dxdy of this is 1/(x + iy)^2
    v = x + 1j * y
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(v != 0, 1j * np.log(np.where(v != 0, v, 1.0)), 0.0)


def cell_average_inverse(d: np.ndarray, h: float) -> np.ndarray:
    """Average of ``1/v`` over the square of side ``h`` centred at ``d``."""
    d = np.asarray(d, dtype=complex)
    out = np.empty_like(d)
    near = np.abs(d) <= _NEAR_CELLS * h
    far = ~near
    df = d[far]
    out[far] = 1.0 / df - h ** 4 / (60.0 * df ** 5)
    out[near] = _corner_sum(_inv_antiderivative, d[near], h) / h ** 2
    out[d == 0] = 0.0
    return out


def cell_average_inverse_square(d: np.ndarray, h: float) -> np.ndarray:
    """Principal-value average of ``1/v**2`` over the square centred at ``d``."""
    d = np.asarray(d, dtype=complex)
    out = _corner_sum(_inv_square_antiderivative, d, h) / h ** 2
    out[d == 0] = 0.0
    return out


@lru_cache(maxsize=8)
def _cauchy_kernel_hat(n: int, h: float) -> np.ndarray:
    N = PAD * n
    k = np.fft.fftfreq(N, d=1.0 / N)
    d = k[None, :] * h + 1j * k[:, None] * h
    kern = cell_average_inverse(d, h) * (h * h / np.pi)
    out = np.fft.fft2(kern)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=8)
def _beurling_multiplier(N: int, h: float) -> np.ndarray:
    xi1 = 2 * np.pi * np.fft.fftfreq(N, d=h)
    xi = xi1[None, :] + 1j * xi1[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(xi != 0, np.conj(xi) / np.where(xi != 0, xi, 1.0), 0.0)
    m.flags.writeable = False
    return m


def _pad(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    out = np.zeros((PAD * n, PAD * n), dtype=complex)
    out[:n, :n] = values
    return out


# --- operators --------------------------------------------------------------

def cauchy_transform(density: ComplexField) -> ComplexField:
    """``(1/pi) * integral of w(zeta) / (z - zeta) dA`` at every node."""
    _check_support(density.values)
    spec = density.spec
    n = spec.n
    conv = np.fft.ifft2(np.fft.fft2(_pad(density.values)) * _cauchy_kernel_hat(n, spec.step))
    return ComplexField(spec, conv[:n, :n])


def beurling_padded(values: np.ndarray, h: float) -> np.ndarray:
    """Beurling transform of an ``n x n`` array on the ``2n x 2n`` padded grid."""
    padded = _pad(values)
    N = padded.shape[0]
    return np.fft.ifft2(np.fft.fft2(padded) * _beurling_multiplier(N, h))


def beurling_transform(density: ComplexField, *, padded: bool = False):
    """``S[w] = d/dz C[w]`` via the unimodular multiplier ``conj(xi)/xi``.

    With ``padded=True`` the full ``2n x 2n`` array is returned instead of a
    field on the original grid.
    """
    _check_support(density.values)
    out = beurling_padded(density.values, density.spec.step)
    if padded:
        return out
    n = density.spec.n
    return ComplexField(density.spec, out[:n, :n])


# --- boundary data and analytic functions ----------------------------------

@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Real samples at ``m`` equispaced parameter values of a closed curve.

    ``curve`` is ``None`` for the unit circle (parameter = angle), otherwise
    the complex vertex array the samples belong to.
    """

    samples: np.ndarray
    curve: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        m = s.size
        if m < 64 or m % 2:
            raise ValueError(f"boundary needs an even number >= 64 of samples, got {m}")
        if not np.all(np.isfinite(s)):
            raise ValueError("boundary samples must be finite")
        if self.curve is not None and np.asarray(self.curve).size != m:
            raise ValueError("curve and samples differ in length")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.size

    @property
    def nonconstant(self) -> bool:
        return bool(self.samples.max() - self.samples.min() > 0)

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.m) / self.m

    @classmethod
    def on_circle(cls, func, m: int) -> "BoundaryFunction":
        theta = 2 * np.pi * np.arange(m) / m
        return cls(func(theta))


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """Truncated Taylor series ``sum a_k w^k`` in the unit disk."""

    taylor: np.ndarray
    boundary_re: BoundaryFunction | None = None

    def __post_init__(self):
        a = np.array(self.taylor, dtype=complex)
        a.flags.writeable = False
        object.__setattr__(self, "taylor", a)

    @property
    def degree(self) -> int:
        return self.taylor.size - 1

    @property
    def is_constant(self) -> bool:
        a = self.taylor
        scale = max(1.0, float(np.max(np.abs(a))))
        return bool(a.size == 1 or np.max(np.abs(a[1:])) <= 1e-14 * scale)

    def _horner(self, coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
        out = np.full(w.shape, coeffs[-1], dtype=complex)
        for c in coeffs[-2::-1]:
            out *= w
            out += c
        return out

    def values(self, w) -> np.ndarray:
        """Evaluate on the closed disk (no range check)."""
        w = np.asarray(w, dtype=complex)
        return self._horner(self.taylor, w)

    def derivative_values(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        if self.taylor.size == 1:
            return np.zeros(w.shape, dtype=complex)
        k = np.arange(1, self.taylor.size)
        return self._horner(self.taylor[1:] * k, w)

    def __call__(self, w):
        return evaluate_analytic(self, w)

    def boundary_values(self, theta) -> np.ndarray:
        return self.values(np.exp(1j * np.asarray(theta, dtype=float)))

    def perturbed(self, eps: float = 1e-8) -> "AnalyticFunction":
        a = np.zeros(max(2, self.taylor.size), dtype=complex)
        a[:self.taylor.size] = self.taylor
        a[1] += eps
        return AnalyticFunction(a, self.boundary_re)


def _check_open_disk(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1.0):
        raise ValueError("evaluation point outside the open unit disk")
    return w


def evaluate_analytic(A: AnalyticFunction, w):
    w = _check_open_disk(w)
    out = A.values(w)
    return out if out.ndim else complex(out)


def derivative(A: AnalyticFunction, w):
    if A.is_constant:
        raise ConstantAnalyticError("derivative of a constant analytic function")
    w = _check_open_disk(w)
    out = A.derivative_values(w)
    return out if out.ndim else complex(out)


def schwarz_integral(phi: BoundaryFunction) -> AnalyticFunction:
    """Analytic ``A`` in the disk with ``Re A = phi`` on the circle, ``Im A(0) = 0``.

    The trapezoid rule in the angle reduces to the DFT of the samples; mode
    ``k`` of ``phi`` becomes the coefficient of ``w**k``.
    """
    if phi.curve is not None:
        raise ValueError("schwarz_integral needs data sampled on the unit circle")
    m = phi.m
    c = np.fft.fft(phi.samples) / m
    a = np.empty(m // 2 + 1, dtype=complex)
    a[0] = c[0].real
    a[1:m // 2] = 2.0 * c[1:m // 2]
    a[m // 2] = c[m // 2].real
    scale = max(1.0, float(np.max(np.abs(a))))
    keep = np.nonzero(np.abs(a) > 1e-15 * scale)[0]
    last = int(keep[-1]) if keep.size else 0
    return AnalyticFunction(a[:last + 1], phi)


def schwarz_quadrature(phi: BoundaryFunction, w) -> np.ndarray:
    """Direct trapezoid evaluation of the Schwarz integral at interior points."""
    if phi.curve is not None:
        raise ValueError("schwarz_quadrature needs data sampled on the unit circle")
    w = np.asarray(w, dtype=complex)
    limit = 1.0 - 10.0 * (2 * np.pi / phi.m)
    if np.any(np.abs(w) >= limit):
        raise ValueError(f"evaluation points must satisfy |w| < {limit:.6f}")
    zeta = np.exp(1j * phi.angles)
    flat = w.ravel()
    kern = (zeta[None, :] + flat[:, None]) / (zeta[None, :] - flat[:, None])
    out = kern @ phi.samples / phi.m
    return out.reshape(w.shape)
