"""y-independent operators in the real gauge A₁ ≡ 0 and their k-sector matrices.

With ψ = e^{iky} φ(x) the operator 2L becomes
    Λ_k = ∂²ₓ − (k + A₂)² + A₂′ + 2V,   −A₂′ = H,
and A₂ = −H̄x + A₂⁰(x) with A₂⁰ periodic and zero-mean.  The spectrum of Λ_k
depends on k only modulo H̄T₁ since x → x + T₁ maps Λ_k to Λ_{k−H̄T₁}.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.signal import resample

from .profiles import Profile1D


class WindowError(RuntimeError):
    """Eigenvalues changed under window doubling: the truncation is too small."""


def _spectral_derivative(values, period):
    n = len(values)
    k = 2j * np.pi * np.fft.fftfreq(n, d=period / n)
    if n % 2 == 0:
        k[n // 2] = 0
    return np.fft.ifft(k * np.fft.fft(values)).real


def _resample(values, n):
    """Periodic trigonometric resampling of one period onto n points."""
    if len(values) == n:
        return np.array(values, dtype=float)
    return resample(np.asarray(values, dtype=float), n)


@dataclass
class ReducedOperator:
    """Samples of H, V and the periodic part A₂⁰ over one period [0, T1)."""

    xs: np.ndarray
    H: np.ndarray
    V: np.ndarray
    Hbar: float
    A2_per: np.ndarray
    T1: float
    T2: float
    kind: str = "general"
    level: int = 0

    @classmethod
    def from_fields(cls, H, V, T1, T2, kind="general", level=0):
        H = np.asarray(H, dtype=float)
        V = np.asarray(V, dtype=float)
        n = len(H)
        xs = T1 * np.arange(n) / n
        Hbar = float(H.mean())
        # −(A₂⁰)′ = H − H̄ with zero mean
        k = 2j * np.pi * np.fft.fftfreq(n, d=T1 / n)
        spec = np.fft.fft(H - Hbar)
        inv = np.zeros_like(spec)
        nz = k != 0
        inv[nz] = -spec[nz] / k[nz]
        if n % 2 == 0:
            inv[n // 2] = 0
        return cls(xs, H, V, Hbar, np.fft.ifft(inv).real, float(T1), float(T2), kind, level)

    @classmethod
    def landau(cls, H, V, T1, T2=1.0, n=16):
        return cls.from_fields(np.full(n, float(H)), np.full(n, float(V)), T1, T2, "landau")

    @property
    def flux(self):
        return float(self.T2 * self.T1 * self.H.mean())

    def A2(self, x):
        """A₂ at grid-aligned x (multiples of T1/len(xs)) or anywhere by trigonometric interpolation."""
        x = np.asarray(x, dtype=float)
        return -self.Hbar * x + _trig_eval(self.A2_per, self.T1, x)

    def gauge_residual(self):
        """max |−A₂′ − H| with A₂′ = −H̄ + (A₂⁰)′ spectrally."""
        dA = -self.Hbar + _spectral_derivative(self.A2_per, self.T1)
        return float(np.abs(-dA - self.H).max())

    def on_grid(self, Nx):
        return _resample(self.H, Nx), _resample(self.V, Nx), _resample(self.A2_per, Nx)


def _trig_eval(values, period, x):
    n = len(values)
    c = np.fft.fft(values) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        c[n // 2] *= 0.5
        c = np.append(c, c[n // 2])
        k = np.append(k, n // 2)
        k[n // 2] = -n // 2
    phase = np.exp(2j * np.pi * np.multiply.outer(x, k) / period)
    return (phase @ c).real


def build_reduced_operator(p: Profile1D, T2: float, level: int = 0) -> ReducedOperator:
    """ReducedOperator for L_level of the profile's chain."""
    H, V = p.fields(level)
    if p.degenerate:
        raise ValueError("a degenerate profile has no period; use ReducedOperator.landau for the constant case")
    return ReducedOperator.from_fields(H, V, p.period, T2, p.kind, level)


def reduced_chain_fields(p: Profile1D, T2: float, N2: int = 8, N1: int = 64):
    """f₀ and H₀ broadcast to a T1×T2 cell for feeding the 2D chain machinery.

    N1 stays moderate: each chain link differentiates twice, so rounding noise
    at the Nyquist mode grows like N1⁴ along a length-2 chain.
    """
    from ..field_core import Cell, PeriodicScalarField

    cell = Cell(p.period, T2, N1, N2)
    H0, V0 = p.fields(0)
    f0 = PeriodicScalarField(cell, np.repeat(_resample(np.log(V0), N1)[:, None], N2, axis=1))
    h0 = PeriodicScalarField(cell, np.repeat(_resample(H0, N1)[:, None], N2, axis=1))
    return f0, h0


def _sinc_d2(n, h):
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        m = -2.0 * (-1.0) ** d / (h * h * d * d)
    m[i, i] = -np.pi**2 / (3 * h * h)
    return m


def _window_half(op: ReducedOperator):
    return 10.0 / np.sqrt(abs(op.Hbar)) + 2 * np.abs(op.A2_per).max() / abs(op.Hbar)


def lambda_k_matrix(op: ReducedOperator, k: float, Nx: int = 64, half_width=None):
    """Sinc-collocation matrix of Λ_k on a Dirichlet window around the classical centre.

    The grid is x_j = j·T1/Nx so periodic coefficients repeat exactly; the window is
    centred on the grid point nearest to the classical centre k/H̄.  Returns (matrix, x).
    """
    if op.Hbar == 0:
        raise ValueError("zero mean field: Λ_k is not confining")
    h = op.T1 / Nx
    half = _window_half(op) if half_width is None else half_width
    J = int(np.ceil(half / h))
    centre = int(round(k / (op.Hbar * h)))
    j = np.arange(centre - J, centre + J + 1)
    Hs, Vs, Ap = op.on_grid(Nx)
    idx = np.mod(j, Nx)
    x = j * h
    A2 = -op.Hbar * x + Ap[idx]
    # A₂′ = −H
    pot = -(k + A2) ** 2 - Hs[idx] + 2 * Vs[idx]
    M = _sinc_d2(len(j), h)
    M[np.diag_indices_from(M)] += pot
    return M, x


def lambda_k_spectrum(op: ReducedOperator, k: float, count: int = 5, Nx: int = 64, check_window=True, tol=1e-9, vectors=False, half_width=None):
    """Lowest `count` eigenvalues of −Λ_k, with optional window-doubling validation."""
    half = _window_half(op) if half_width is None else half_width
    M, x = lambda_k_matrix(op, k, Nx, half_width=half)
    vals, vecs = eigh(-M, subset_by_index=[0, count - 1])
    if check_window:
        M2, _ = lambda_k_matrix(op, k, Nx, half_width=2 * half)
        v2 = eigh(-M2, eigvals_only=True, subset_by_index=[0, count - 1])
        err = np.abs(v2 - vals).max()
        if err > tol * max(1.0, np.abs(vals).max()):
            raise WindowError(f"window doubling moved the lowest eigenvalues by {err:.2e}")
    if vectors:
        return vals, vecs, x
    return vals


def L_levels(op: ReducedOperator, k: float, count: int = 5, Nx: int = 64, **kw):
    """Top `count` eigenvalues of L in the k-sector (L = Λ_k/2), in decreasing order."""
    return -0.5 * lambda_k_spectrum(op, k, count, Nx, **kw)


def _sinc_d1(n, h):
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = (-1.0) ** d / (h * d)
    m[i, i] = 0.0
    return m


def transport_chain_1d(p: Profile1D, T2: float, k: float, psi0, Nx: int = 64, steps: int = 2):
    """Push a zero mode of L₀ in the k-sector through `steps` Laplace transformations.

    In the sector, 2L_j is conjugate to (∂ₓ + o_j)(∂ₓ + i_j) + 2V_j with o₀ = −u,
    i₀ = u = k + A₂; one step maps ψ ↦ (∂ₓ + i_j)ψ and i_{j+1} = i_j − f_j′.
    Returns the list [ψ₀, ψ₁, …] on the window grid of lambda_k_matrix.
    """
    op = build_reduced_operator(p, T2, 0)
    _, x = lambda_k_matrix(op, k, Nx)
    h = op.T1 / Nx
    idx = np.mod(np.rint(x / h).astype(int), Nx)
    _, _, Ap = op.on_grid(Nx)
    u = k - op.Hbar * x + Ap[idx]
    D = _sinc_d1(len(x), h)
    inner = u.copy()
    out = [np.asarray(psi0, dtype=float)]
    for j in range(steps):
        _, V = p.fields(j)
        df = _spectral_derivative(_resample(np.log(V), Nx), op.T1)[idx]
        out.append(D @ out[-1] + inner * out[-1])
        inner = inner - df
    return out


def sector_residual(op: ReducedOperator, k: float, psi, level: float, Nx: int = 64):
    """‖(L − level)ψ‖ / ‖ψ‖ in the k-sector, with L = Λ_k/2."""
    M, _ = lambda_k_matrix(op, k, Nx)
    psi = np.asarray(psi)
    return float(np.linalg.norm(0.5 * M @ psi - level * psi) / np.linalg.norm(psi))


def profile_chain(p: Profile1D, T2: float = 1.0, N2: int = 8, n: int = 2, tol=1e-7, N1: int = 64):
    """Run the 2D chain machinery on the broadcast profile and classify it."""
    from ..laplace_continuum import chain_iterate

    f0, H0 = reduced_chain_fields(p, T2, N2, N1)
    return chain_iterate(f0, H0, n, tol)


def semicyclic_with_zero_level(C2, depth=0.5, bracket=(0.0, 1.0), T2=1.0, samples=256):
    """Semi-cyclic n = 2 profile whose L₀ has 0 as the top level of the k = 0 sector.

    The offset a is tuned by root finding; the constant sits `depth` below the
    double-root value so the profile stays nonsingular.
    """
    from scipy.optimize import brentq

    from .profiles import double_root_constant, semicyclic_profile

    def make(a):
        return semicyclic_profile(C2, a, double_root_constant("semi_cyclic", C2, a) - depth, samples)

    def top(a):
        return L_levels(build_reduced_operator(make(a), T2, 0), 0.0, 1)[0]

    return make(brentq(top, *bracket, xtol=1e-14))
