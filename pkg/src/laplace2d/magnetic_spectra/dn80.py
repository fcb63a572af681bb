"""Ground states of factorized operators with positive integer flux.

With Δφ = −H split as φ = φ_per − H̄|z|²/4, every solution of (∂̄ + B)ψ = 0 in
the real gauge is ψ = e^{φ} g(z) with g holomorphic.  The magnetic-Bloch ones are
    ψ = e^{φ_per − H̄|z|²/4 + ρz² + az} Π_j σ(z − a_j),   ρ = H̄/4 − m η₁/T₁,
where ρ removes the z-dependence of |ψ(z+T₁)/ψ(z)| and a fixes both moduli
to one, so that the quasi-momenta are real.
"""

from dataclasses import dataclass

import numpy as np

from ..field_core import (
    PeriodicScalarField,
    RectLattice,
    SectionField,
    canonical_phi,
    check_integer_flux,
    trig_interpolate,
    translation_phase,
)


class ZeroCountError(ValueError):
    pass


class ASolveError(RuntimeError):
    pass


@dataclass
class DN80State:
    H: PeriodicScalarField
    zeros: tuple
    Hbar: float
    m: int
    rho: float
    a: complex
    p: tuple
    log_scale: float
    phi_per: PeriodicScalarField

    @property
    def cell(self):
        return self.H.cell

    def log_psi(self, z):
        z = np.asarray(z, dtype=complex)
        lat = RectLattice(self.cell.T1, self.cell.T2)
        out = trig_interpolate(self.phi_per, z.real, z.imag) - 0.25 * self.Hbar * np.abs(z) ** 2
        out = out + self.rho * z**2 + self.a * z
        for aj in self.zeros:
            out = out + lat.log_sigma(z - aj)
        return out - self.log_scale

    def __call__(self, z):
        return np.exp(self.log_psi(z))

    def cell_values(self):
        """Samples on the N1×N2 nodes of the fundamental cell (flattened like the Bloch matrix)."""
        return self(self.cell.z()).ravel()

    def section(self, cells=2) -> SectionField:
        c = self.cell
        x = np.arange(cells * c.N1) * c.hx
        y = np.arange(cells * c.N2) * c.hy
        X, Y = np.meshgrid(x, y, indexing="ij")
        return SectionField(c, self.m, self(X + 1j * Y), self.p)

    def first_order_residual(self, z, h=1e-3):
        """max |(∂̄ + B)ψ| / max |ψ| at points z, ∂̄ = ∂x + i∂y by 4th-order differences."""
        z = np.asarray(z, dtype=complex)

        def d(e):
            return (-self(z + 2 * e) + 8 * self(z + e) - 8 * self(z - e) + self(z - 2 * e)) / (12 * h)

        dbar = d(h) + 1j * d(1j * h)
        B_per = -_dbar_interp(self.phi_per, z)
        B = B_per + 0.5 * self.Hbar * z
        psi = self(z)
        return float(np.abs(dbar + B * psi).max() / np.abs(psi).max())


def _dbar_interp(f: PeriodicScalarField, z):
    from ..field_core import dbar

    g = dbar(f)
    re = trig_interpolate(g.real(), z.real, z.imag)
    im = trig_interpolate(g.imag(), z.real, z.imag)
    return re + 1j * im


def dn80_ground_state(H: PeriodicScalarField, zeros, probe=None) -> DN80State:
    """Magnetic-Bloch zero mode of (∂̄ + B) with prescribed zeros a_j (one per flux quantum)."""
    cell = H.cell
    Hbar, phi_per = canonical_phi(H)
    m = check_integer_flux(cell, Hbar)
    if m <= 0:
        raise ZeroCountError(f"flux must be positive, got {m}·2π")
    zeros = tuple(complex(a) for a in zeros)
    if len(zeros) != m:
        raise ZeroCountError(f"flux 2π·{m} needs exactly {m} zeros, got {len(zeros)}")
    lat = RectLattice(cell.T1, cell.T2)
    rho = 0.25 * Hbar - m * lat.eta1 / cell.T1
    st = DN80State(H, zeros, Hbar, m, rho, 0j, (0.0, 0.0), 0.0, phi_per)
    if probe is None:
        probe = np.array([0.13 + 0.29j, 0.41 + 0.07j, 0.77 + 0.61j]) * np.array([cell.T1, cell.T2, cell.T1]).mean()
    probe = np.asarray(probe, dtype=complex)
    R1 = (st.log_psi(probe + cell.T1) - st.log_psi(probe)).real
    R2 = (st.log_psi(probe + 1j * cell.T2) - st.log_psi(probe)).real
    spread = max(np.ptp(R1), np.ptp(R2))
    if not spread <= 1e-8 * max(1.0, np.abs(R1).max(), np.abs(R2).max()):
        raise ASolveError(f"translation moduli depend on z (spread {spread:.2e}); cannot fix a")
    st.a = complex(-R1.mean() / cell.T1, R2.mean() / cell.T2)
    X, Y = cell.mesh()
    st.log_scale = float(st.log_psi(X + 1j * Y).real.max())
    z0 = probe[0]
    ph1 = (st.log_psi(z0 + cell.T1) - st.log_psi(z0)).imag + translation_phase(1, Hbar, cell, z0.real, z0.imag)
    ph2 = (st.log_psi(z0 + 1j * cell.T2) - st.log_psi(z0)).imag + translation_phase(2, Hbar, cell, z0.real, z0.imag)
    st.p = (float(np.mod(ph1, 2 * np.pi) / cell.T1), float(np.mod(ph2, 2 * np.pi) / cell.T2))
    return st
