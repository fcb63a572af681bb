"""Periodic fields on a rectangular cell with spectral calculus."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ParityError(ValueError):
    """Real-valued field expected."""


class SolvabilityError(ValueError):
    """Periodic Poisson right-hand side with nonzero mean."""


@dataclass(frozen=True)
class Cell:
    """Period rectangle [0, T1) x [0, T2) sampled on an N1 x N2 grid."""

    T1: float
    T2: float
    N1: int = 64
    N2: int = 64

    def __post_init__(self):
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("cell periods must be positive")
        if self.N1 < 8 or self.N2 < 8:
            raise ValueError("grid resolution must be at least 8 x 8")

    @property
    def area(self):
        return self.T1 * self.T2

    @property
    def hx(self):
        return self.T1 / self.N1

    @property
    def hy(self):
        return self.T2 / self.N2

    @property
    def x(self):
        return np.arange(self.N1) * self.hx

    @property
    def y(self):
        return np.arange(self.N2) * self.hy

    def mesh(self):
        """Node coordinates, arrays of shape (N1, N2) with x along axis 0."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def z(self):
        X, Y = self.mesh()
        return X + 1j * Y

    def wavenumbers(self):
        kx = 2 * np.pi * np.fft.fftfreq(self.N1, d=self.hx)
        ky = 2 * np.pi * np.fft.fftfreq(self.N2, d=self.hy)
        return np.meshgrid(kx, ky, indexing="ij")

    def with_resolution(self, N1, N2=None):
        return Cell(self.T1, self.T2, N1, N1 if N2 is None else N2)


@dataclass(frozen=True)
class PeriodicScalarField:
    """Samples of a doubly periodic function at the grid nodes of `cell`."""

    cell: Cell
    values: np.ndarray = field(repr=False)
    parity: str = "real"

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.cell.N1, self.cell.N2):
            raise ValueError(f"values shape {vals.shape} does not match cell grid")
        if self.parity == "real":
            if np.iscomplexobj(vals):
                if np.abs(vals.imag).max(initial=0.0) > 1e-12 * max(1.0, np.abs(vals).max()):
                    raise ParityError("real-parity field has an imaginary part")
                vals = vals.real
            vals = vals.astype(float)
        elif self.parity == "complex":
            vals = vals.astype(complex)
        else:
            raise ValueError(f"unknown parity {self.parity!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, cell, fn: Callable, parity=None):
        X, Y = cell.mesh()
        vals = np.asarray(fn(X, Y))
        if vals.ndim == 0:
            vals = np.full(X.shape, vals)
        if parity is None:
            parity = "complex" if np.iscomplexobj(vals) else "real"
        return cls(cell, vals, parity)

    @classmethod
    def constant(cls, cell, c):
        parity = "complex" if np.iscomplexobj(c) else "real"
        return cls(cell, np.full((cell.N1, cell.N2), c), parity)

    def _wrap(self, vals):
        parity = "complex" if np.iscomplexobj(vals) else "real"
        return PeriodicScalarField(self.cell, vals, parity)

    def _other(self, other):
        if isinstance(other, PeriodicScalarField):
            if other.cell != self.cell:
                raise ValueError("fields live on different cells")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def mean(self):
        return self.values.mean()

    def max_abs(self):
        return float(np.abs(self.values).max())

    def exp(self):
        return self._wrap(np.exp(self.values))

    def log(self):
        return self._wrap(np.log(self.values))

    def real(self):
        return PeriodicScalarField(self.cell, self.values.real, "real")

    def imag(self):
        return PeriodicScalarField(self.cell, np.imag(self.values), "real")

    def conj(self):
        return self._wrap(np.conj(self.values))


def _spectral(f: PeriodicScalarField, symbol):
    return np.fft.ifft2(symbol * np.fft.fft2(f.values))


def _nyquist_mask(cell):
    """Drop the unpaired Nyquist modes for odd-order derivatives."""
    mask = np.ones((cell.N1, cell.N2))
    if cell.N1 % 2 == 0:
        mask[cell.N1 // 2, :] = 0
    if cell.N2 % 2 == 0:
        mask[:, cell.N2 // 2] = 0
    return mask


def deriv_x(f: PeriodicScalarField) -> PeriodicScalarField:
    KX, _ = f.cell.wavenumbers()
    out = _spectral(f, 1j * KX * _nyquist_mask(f.cell))
    return f._wrap(out.real if f.parity == "real" else out)


def deriv_y(f: PeriodicScalarField) -> PeriodicScalarField:
    _, KY = f.cell.wavenumbers()
    out = _spectral(f, 1j * KY * _nyquist_mask(f.cell))
    return f._wrap(out.real if f.parity == "real" else out)


def d(f: PeriodicScalarField) -> PeriodicScalarField:
    """∂ = ∂x − i∂y."""
    KX, KY = f.cell.wavenumbers()
    out = _spectral(f, (1j * KX + KY) * _nyquist_mask(f.cell))
    return PeriodicScalarField(f.cell, out, "complex")


def dbar(f: PeriodicScalarField) -> PeriodicScalarField:
    """∂̄ = ∂x + i∂y."""
    KX, KY = f.cell.wavenumbers()
    out = _spectral(f, (1j * KX - KY) * _nyquist_mask(f.cell))
    return PeriodicScalarField(f.cell, out, "complex")


def laplacian(f: PeriodicScalarField) -> PeriodicScalarField:
    KX, KY = f.cell.wavenumbers()
    out = _spectral(f, -(KX**2 + KY**2))
    return f._wrap(out.real if f.parity == "real" else out)


def flux(H: PeriodicScalarField) -> float:
    """Integral of H over the cell (periodic trapezoid rule)."""
    if H.parity != "real":
        raise ParityError("flux requires a real field")
    return float(H.values.sum() * H.cell.hx * H.cell.hy)


def poisson_solve_periodic(rhs: PeriodicScalarField, tol=1e-10) -> PeriodicScalarField:
    """Zero-mean periodic solution of Δφ = rhs."""
    m = rhs.mean()
    scale = max(1.0, rhs.max_abs())
    if abs(m) > tol * scale:
        raise SolvabilityError(f"right-hand side has mean {m!r}; no periodic solution")
    KX, KY = rhs.cell.wavenumbers()
    k2 = KX**2 + KY**2
    k2[0, 0] = 1.0
    coef = np.fft.fft2(rhs.values) / (-k2)
    coef[0, 0] = 0.0
    out = np.fft.ifft2(coef)
    return rhs._wrap(out.real if rhs.parity == "real" else out)


def trig_interpolate(f: PeriodicScalarField, x, y):
    """Evaluate the band-limited interpolant of `f` at arbitrary points.

    The Nyquist modes are split symmetrically so that real fields stay real.
    """
    cell = f.cell
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    coef = np.fft.fft2(f.values) / (cell.N1 * cell.N2)
    k1 = np.fft.fftfreq(cell.N1, d=1.0 / cell.N1)
    k2 = np.fft.fftfreq(cell.N2, d=1.0 / cell.N2)
    w1 = np.ones(cell.N1)
    w2 = np.ones(cell.N2)
    if cell.N1 % 2 == 0:
        w1[cell.N1 // 2] = 0.5
    if cell.N2 % 2 == 0:
        w2[cell.N2 // 2] = 0.5
    ex = np.exp(2j * np.pi * np.multiply.outer(x.ravel(), k1) / cell.T1) * w1
    ey = np.exp(2j * np.pi * np.multiply.outer(y.ravel(), k2) / cell.T2) * w2
    if cell.N1 % 2 == 0:
        # mirrored Nyquist term e^{+iπNx/T}
        ex_ny = np.exp(1j * np.pi * cell.N1 * x.ravel() / cell.T1) * 0.5
    if cell.N2 % 2 == 0:
        ey_ny = np.exp(1j * np.pi * cell.N2 * y.ravel() / cell.T2) * 0.5
    val = np.einsum("pi,ij,pj->p", ex, coef, ey)
    if cell.N1 % 2 == 0:
        val += np.einsum("p,j,pj->p", ex_ny, coef[cell.N1 // 2, :], ey)
    if cell.N2 % 2 == 0:
        val += np.einsum("pi,i,p->p", ex, coef[:, cell.N2 // 2], ey_ny)
    if cell.N1 % 2 == 0 and cell.N2 % 2 == 0:
        val += ex_ny * ey_ny * coef[cell.N1 // 2, cell.N2 // 2]
    val = val.reshape(x.shape)
    return val.real if f.parity == "real" else val


def random_bandlimited(cell: Cell, rng, kmax=3, amplitude=1.0, mean=0.0) -> PeriodicScalarField:
    """Random real trigonometric polynomial with |k1|, |k2| ≤ kmax."""
    X, Y = cell.mesh()
    vals = np.full(X.shape, float(mean))
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(0, kmax + 1):
            if k2 == 0 and k1 <= 0:
                continue
            c = (rng.normal() + 1j * rng.normal()) * amplitude / (1 + k1 * k1 + k2 * k2)
            vals += 2 * (c * np.exp(2j * np.pi * (k1 * X / cell.T1 + k2 * Y / cell.T2))).real
    return PeriodicScalarField(cell, vals, "real")
