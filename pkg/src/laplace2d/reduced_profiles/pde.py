"""Doubly periodic quasi-cyclic n = 2 equation ½Δf₀ = C₂ − 2e^{f₀} and its linearization.

Newton runs on the even-even subspace of the square (T, T) torus: f is sampled at
x_i = iT/N, i = 0..N/2, in both directions and the Laplacian is diagonal in the
type-I cosine basis.  The seed cos(2πx/T) + cos(2πy/T) lies in this subspace.

Linearizing the length-n quasi-cyclic chain about its constant solution
V₀ = H₀ = C_n/n gives, per Fourier mode with ½Δ ↦ s = −κ²/2, a polynomial
p_n(s) = δV_{n−1}/δf₀; a mode is singular exactly when p_n(−κ²/2) = 0.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.fft import dctn, idctn

from ..field_core import Cell, PeriodicScalarField
from .profiles import RegimeError


class NewtonDivergenceError(RuntimeError):
    pass


class CollapseError(RuntimeError):
    """Newton converged, but to (a neighbourhood of) the constant solution."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass
class PDESolution:
    C2: float
    T: float
    N: int
    quadrant: np.ndarray
    residual: float
    iterations: int
    distance_from_constant: float
    history: list = field(default_factory=list)

    @property
    def full(self) -> np.ndarray:
        """Samples on the full N×N periodic grid by even reflection."""
        q = self.quadrant
        idx = np.arange(self.N)
        idx = np.where(idx <= self.N // 2, idx, self.N - idx)
        return q[np.ix_(idx, idx)]

    def field(self) -> PeriodicScalarField:
        return PeriodicScalarField(Cell(self.T, self.T, self.N, self.N), self.full)

    def fourier_energies(self):
        """(x-energy, y-energy): mean-square contributions of modes with k_x ≠ 0 and with k_y ≠ 0."""
        f = self.full
        c = np.fft.fft2(f) / f.size
        p = np.abs(c) ** 2
        return float(p[1:, :].sum()), float(p[:, 1:].sum())

    def symmetry_defect(self):
        return float(np.abs(self.quadrant - self.quadrant.T).max())


def _dct1_laplacian(M, T):
    """Dense matrix of ∂²ₓ on the M even-symmetric nodes of one period T = 2(M−1)h."""
    k = 2 * np.pi * np.arange(M) / T
    eye = np.eye(M)
    return idctn(-(k**2)[:, None] * dctn(eye, type=1, axes=[0]), type=1, axes=[0])


def pde_residual(f, T, C2):
    """½Δf − C₂ + 2e^f on an even-even quadrant."""
    M = f.shape[0]
    k = 2 * np.pi * np.arange(M) / T
    lap = -(k[:, None] ** 2 + k[None, :] ** 2)
    return 0.5 * idctn(lap * dctn(f, type=1), type=1) - C2 + 2 * np.exp(f)


def solve_quasicyclic_pde(C2, T, seed_amplitude, N=64, tol=1e-10, max_iter=60, reject_collapse=True) -> PDESolution:
    """Newton solve of ½Δf₀ = C₂ − 2e^{f₀} on the (T, T) torus from the symmetric cosine seed."""
    if C2 <= 0 or T <= 0 or N % 2:
        raise ValueError("need C2 > 0, T > 0 and even N")
    M = N // 2 + 1
    x = np.arange(M) * T / N
    X, Y = np.meshgrid(x, x, indexing="ij")
    fstar = np.log(C2 / 2)
    f = fstar + seed_amplitude * (np.cos(2 * np.pi * X / T) + np.cos(2 * np.pi * Y / T))
    D1 = _dct1_laplacian(M, T)
    eye = np.eye(M)
    half_lap = 0.5 * (np.kron(D1, eye) + np.kron(eye, D1))
    history = []
    for it in range(max_iter + 1):
        F = pde_residual(f, T, C2)
        r = float(np.abs(F).max())
        history.append(r)
        if not np.isfinite(r) or np.abs(f).max() > 50:
            raise NewtonDivergenceError(f"Newton diverged at iteration {it} (residual {r:.3e})")
        if r <= tol:
            break
        J = half_lap + np.diag(2 * np.exp(f).ravel())
        f = f - np.linalg.solve(J, F.ravel()).reshape(M, M)
    else:
        raise NewtonDivergenceError(f"no convergence in {max_iter} iterations (residual {r:.3e})")
    dist = float(np.abs(f - fstar).max())
    sol = PDESolution(float(C2), float(T), N, f, r, it, dist, history)
    if reject_collapse and dist < seed_amplitude / 10:
        raise CollapseError(f"Newton collapsed to the constant ln(C2/2) (distance {dist:.2e}) at T = {T:.6g}", sol)
    return sol


def constant_base(n, Cn):
    """Constant solution of the length-n quasi-cyclic chain: H_j = v, V_j = (j+1)v with v = C_n/n."""
    if n < 1:
        raise ValueError("n >= 1")
    if Cn <= 0:
        raise RegimeError("no positive constant base solution for C_n <= 0")
    v = Cn / n
    return {"H": [v] * (n + 1), "V": [(j + 1) * v for j in range(n + 1)]}


def linearized_polynomial(n, Cn) -> Polynomial:
    """δV_{n−1}/δf₀ as a polynomial in s = symbol of ½Δ, about the constant base solution."""
    v = constant_base(n, Cn)["H"][0]
    h = Polynomial([v])
    V = Polynomial([v])
    for j in range(n - 1):
        h = h + Polynomial([0, 1]) * V / ((j + 1) * v)
        V = V + h
    return V


def singular_wavenumbers(n, Cn):
    """Positive κ² at which the linearization is singular."""
    roots = linearized_polynomial(n, Cn).roots()
    kap = [-2 * r.real for r in roots if abs(r.imag) <= 1e-9 * max(1, abs(r)) and r.real < 0]
    return sorted(kap)


def threshold_period(C2):
    """T* for n = 2: the (1,0) mode is singular when (2π/T)² = 2C₂."""
    return float(2 * np.pi / np.sqrt(singular_wavenumbers(2, C2)[0]))


def linearized_mode_count(n, Cn, T, kmax=None, rtol=1e-9):
    """Number of lattice modes (k, l) ≠ 0 on the (T, T) torus at which the linearization is singular."""
    kappas = singular_wavenumbers(n, Cn)
    if not kappas:
        return 0
    if kmax is None:
        kmax = int(np.ceil(np.sqrt(max(kappas)) * T / (2 * np.pi))) + 1
    r = np.arange(-kmax, kmax + 1)
    K, L = np.meshgrid(r, r, indexing="ij")
    k2 = (2 * np.pi / T) ** 2 * (K**2 + L**2)
    count = 0
    for kap in kappas:
        count += int(np.count_nonzero((np.abs(k2 - kap) <= rtol * kap) & ((K != 0) | (L != 0))))
    return count


def singular_periods(n, Cn, T_range, max_index=50):
    """All periods in T_range at which some mode (k, l) is singular, with the modes."""
    lo, hi = T_range
    out = {}
    for kap in singular_wavenumbers(n, Cn):
        for k in range(0, max_index + 1):
            for l in range(k, max_index + 1):
                if k == l == 0:
                    continue
                T = 2 * np.pi * np.sqrt(k * k + l * l) / np.sqrt(kap)
                if lo <= T <= hi:
                    out.setdefault(round(T, 12), []).append((k, l, kap))
    return dict(sorted(out.items()))


def mode_count_scan(n, Cn, T_values):
    """Table of (T, count) plus the exact singular periods in the scanned range."""
    T_values = np.asarray(T_values, dtype=float)
    table = [(float(T), linearized_mode_count(n, Cn, T)) for T in T_values]
    exact = singular_periods(n, Cn, (T_values.min(), T_values.max()))
    return {"table": table, "singular_periods": exact, "any_positive": bool(exact)}
