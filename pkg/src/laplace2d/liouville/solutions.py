"""Explicit solutions of the elliptic Liouville equation Δφ + 32 e^φ = 0.

For an analytic f with f f′ ≠ 0,
    φ = ln(|f|² |f′|² / (1 + |f|⁴)²)
is a solution, and φ ↦ φ∘g + 2 ln|g′| maps solutions to solutions.  With
F = f² this is φ = ln(|F′|² / (1 + |F|²)²) − ln 4, the usual Liouville form
rescaled, so the constant 32 matches Δ = ∂∂̄.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..conventions import LIOUVILLE_CONSTANT


class SingularityError(ValueError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class PatchTooSmallError(ValueError):
    pass


class NotAnalyticError(ValueError):
    pass


@dataclass
class Patch:
    """Samples on a uniform rectangular grid; values[i, j] sits at (x[i], y[j])."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    @property
    def h(self):
        return float(self.x[1] - self.x[0])

    @property
    def z(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X + 1j * Y

    def to_csv_rows(self, residual=None):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        cols = [X.ravel(), Y.ravel(), self.values.ravel()]
        if residual is not None:
            cols.append(residual.ravel())
        return np.column_stack(cols)


def grid(x0, x1, y0, y1, h):
    """Uniform grid with spacing h covering [x0, x1] × [y0, y1]."""
    nx = int(round((x1 - x0) / h)) + 1
    ny = int(round((y1 - y0) / h)) + 1
    return x0 + h * np.arange(nx), y0 + h * np.arange(ny)


def _cr_residual(fn, dfn, z, delta):
    """max |∂x f − f′| and |∂y f − i f′| by 4th-order differences at spacing delta, relative to max |f′|."""
    def d4(shift):
        return (-fn(z + 2 * shift) + 8 * fn(z + shift) - 8 * fn(z - shift) + fn(z - 2 * shift)) / (12 * delta)

    fp = dfn(z)
    scale = max(np.abs(fp).max(), 1e-300)
    rx = np.abs(d4(delta) - fp).max()
    ry = np.abs(d4(1j * delta) - 1j * fp).max()
    return float(max(rx, ry) / scale)


@dataclass
class AnalyticSample:
    """f and f′ sampled on a patch, with the callables they came from."""

    x: np.ndarray
    y: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    fn: Callable = None
    dfn: Callable = None

    @classmethod
    def from_function(cls, fn, dfn, x, y, check_tol=1e-8, delta=1e-3):
        X, Y = np.meshgrid(x, y, indexing="ij")
        z = X + 1j * Y
        sample = cls(np.asarray(x), np.asarray(y), fn(z), dfn(z), fn, dfn)
        if check_tol is not None:
            r = _cr_residual(fn, dfn, z, delta)
            if not r <= check_tol:
                raise NotAnalyticError(f"Cauchy-Riemann residual {r:.2e} exceeds {check_tol:g}")
        return sample

    @property
    def z(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X + 1j * Y


def _check_nonvanishing(values, z, what):
    mag = np.abs(values)
    k = np.argmin(mag)
    if not mag.flat[k] > 0 or not np.all(np.isfinite(values)):
        loc = complex(z.flat[k]) if np.isfinite(mag.flat[k]) else complex(z.flat[np.argmax(~np.isfinite(values).ravel())])
        raise SingularityError(f"{what} vanishes or is singular near z = {loc:.6g}", location=loc)


def phi_from_values(f, fp):
    af2 = np.abs(f) ** 2
    return np.log(af2) + np.log(np.abs(fp) ** 2) - 2 * np.log1p(af2**2)


def liouville_phi(sample: AnalyticSample) -> Patch:
    """φ = ln(|f|²|f′|²/(1+|f|⁴)²) on the sample's patch."""
    z = sample.z
    _check_nonvanishing(sample.f, z, "f")
    _check_nonvanishing(sample.fprime, z, "f'")
    return Patch(sample.x, sample.y, phi_from_values(sample.f, sample.fprime))


def liouville_phi_fn(fn, dfn):
    """φ as a callable of z."""

    def phi(z):
        return phi_from_values(fn(z), dfn(z))

    return phi


def _lap4(v, h):
    """4th-order 9-point-per-axis Laplacian on the interior (margin 2)."""
    c = v[2:-2, 2:-2]
    dxx = -v[:-4, 2:-2] + 16 * v[1:-3, 2:-2] - 30 * c + 16 * v[3:-1, 2:-2] - v[4:, 2:-2]
    dyy = -v[2:-2, :-4] + 16 * v[2:-2, 1:-3] - 30 * c + 16 * v[2:-2, 3:-1] - v[2:-2, 4:]
    return (dxx + dyy) / (12 * h * h)


def liouville_residual_field(phi: Patch) -> np.ndarray:
    if min(phi.values.shape) < 5:
        raise PatchTooSmallError("need at least 5 nodes per direction for the 4th-order stencil")
    c = phi.values[2:-2, 2:-2]
    return _lap4(phi.values, phi.h) + LIOUVILLE_CONSTANT * np.exp(c)


def liouville_residual(phi: Patch) -> float:
    """max over interior nodes of |Δφ + 32 e^φ|."""
    return float(np.abs(liouville_residual_field(phi)).max())


def pointwise_residual(phi_fn, z, h):
    """|Δφ + 32 e^φ| at the points z using a 4th-order stencil of spacing h around each."""
    z = np.asarray(z, dtype=complex)
    c = phi_fn(z)
    acc = -30 * c * 2
    for s, w in ((1, 16), (2, -1)):
        for e in (h, 1j * h):
            acc = acc + w * (phi_fn(z + s * e) + phi_fn(z - s * e))
    return np.abs(acc / (12 * h * h) + LIOUVILLE_CONSTANT * np.exp(c))


def richardson_order(phi_fn, z, h0, levels=3):
    """Observed convergence orders log2(r(h)/r(h/2)) of the pointwise residual at fixed points."""
    res = [np.abs(pointwise_residual(phi_fn, z, h0 / 2**k)).max() for k in range(levels)]
    return [float(np.log2(res[k] / res[k + 1])) for k in range(levels - 1)], res


def liouville_symmetry(phi_fn, g, dg):
    """The solution z ↦ φ(g(z)) + 2 ln|g′(z)|."""

    def new_phi(z):
        gp = dg(z)
        if np.any(np.abs(gp) == 0):
            k = int(np.argmin(np.abs(gp)))
            loc = complex(np.ravel(z)[k]) if np.ndim(z) else complex(z)
            raise SingularityError(f"g' vanishes near z = {loc:.6g}", location=loc)
        return phi_fn(g(z)) + 2 * np.log(np.abs(gp))

    return new_phi


def symmetry_patch(phi_fn, g: AnalyticSample) -> Patch:
    """Apply the symmetry with a sampled g and return the new solution on g's patch."""
    _check_nonvanishing(g.fprime, g.z, "g'")
    return Patch(g.x, g.y, phi_fn(g.f) + 2 * np.log(np.abs(g.fprime)))


def sample_patch(phi_fn, x, y) -> Patch:
    X, Y = np.meshgrid(x, y, indexing="ij")
    return Patch(np.asarray(x), np.asarray(y), phi_fn(X + 1j * Y))
