"""Operator coefficients, gauge changes and magnetic translations.

A vector potential with nonzero mean field is not periodic.  Coefficients are
therefore stored as a periodic part plus the symmetric-gauge linear part
A_lin = -Hbar zbar / 2, B_lin = Hbar z / 2 fixed by the mean field Hbar.
"""

from dataclasses import dataclass, replace

import numpy as np

from .fields import (
    Cell,
    PeriodicScalarField,
    d,
    dbar,
    flux,
    poisson_solve_periodic,
)


class FluxQuantizationError(ValueError):
    """Magnetic translations do not commute for non-integer flux."""


@dataclass(frozen=True)
class OperatorCoefficients:
    """L = ½(∂̄+B)(∂+A) + V with A = A_lin + A_per, B = B_lin + B_per."""

    cell: Cell
    A_per: PeriodicScalarField
    B_per: PeriodicScalarField
    V: PeriodicScalarField
    Hbar: float = 0.0
    gauge_tag: str = "general"

    @property
    def H(self) -> PeriodicScalarField:
        # the linear part contributes exactly Hbar
        h = 0.5 * (d(self.B_per) - dbar(self.A_per))
        return (h + self.Hbar).real()

    @property
    def U(self) -> PeriodicScalarField:
        return self.V - self.H

    def A_at(self, z):
        """Full A at node coordinates z (grid-shaped)."""
        return self.A_per.values - 0.5 * self.Hbar * np.conj(z)

    def B_at(self, z):
        return self.B_per.values + 0.5 * self.Hbar * z

    def real_gauge_defect(self):
        """max |B + conj A| and max |Im ∂̄A| (both vanish in the real Lorentz gauge)."""
        b_def = np.abs(self.B_per.values + np.conj(self.A_per.values)).max()
        lor = np.abs(dbar(self.A_per).values.imag).max()
        return float(b_def), float(lor)


def potential_from_phi(phi_per: PeriodicScalarField, Hbar: float, V: PeriodicScalarField):
    """Real Lorentz gauge A = ∂φ, B = −∂̄φ for φ = φ_per − Hbar|z|²/4."""
    A = d(phi_per)
    B = -dbar(phi_per)
    return OperatorCoefficients(phi_per.cell, A, B, V, Hbar, "real_lorentz")


def canonical_phi(H: PeriodicScalarField):
    """Split Δφ = −H into mean field and zero-mean periodic potential."""
    Hbar = float(H.mean())
    phi_per = poisson_solve_periodic(-(H - Hbar))
    return Hbar, phi_per


def operator_from_fields(H: PeriodicScalarField, V: PeriodicScalarField):
    """Canonical real-gauge coefficients of the operator with field H and potential V."""
    Hbar, phi_per = canonical_phi(H)
    return potential_from_phi(phi_per, Hbar, V)


def gauge_transform(L: OperatorCoefficients, f: PeriodicScalarField) -> OperatorCoefficients:
    """Coefficients of e^{−f} L e^{f}: A → A + ∂f, B → B + ∂̄f."""
    if f.cell != L.cell:
        raise ValueError("gauge function lives on a different cell")
    A = L.A_per + d(f)
    B = L.B_per + dbar(f)
    return replace(L, A_per=A, B_per=B, gauge_tag="general")


def apply_operator(L: OperatorCoefficients, psi: PeriodicScalarField) -> PeriodicScalarField:
    """L psi = ½(∂̄+B)(∂+A)psi + V psi for a periodic psi (zero mean field only)."""
    if abs(L.Hbar) > 1e-12:
        raise FluxQuantizationError("spectral application needs a periodic section (Hbar = 0)")
    if psi.cell != L.cell:
        raise ValueError("psi lives on a different cell")
    first = d(psi) + L.A_per * psi
    return 0.5 * (dbar(first) + L.B_per * first) + L.V * psi


# --- magnetic translations -------------------------------------------------


def mean_field(cell: Cell, flux_quanta: int) -> float:
    return 2 * np.pi * flux_quanta / cell.area


def translation_phase(direction: int, Hbar: float, cell: Cell, x, y):
    """f_k(x, y) of the symmetric gauge."""
    if direction == 1:
        return -0.5 * Hbar * cell.T1 * np.asarray(y)
    if direction == 2:
        return 0.5 * Hbar * cell.T2 * np.asarray(x)
    raise ValueError("direction must be 1 or 2")


def check_integer_flux(cell: Cell, Hbar: float, tol=1e-8):
    m = Hbar * cell.area / (2 * np.pi)
    if abs(m - round(m)) > tol:
        raise FluxQuantizationError(f"flux is {m:.6g}·2π, not an integer multiple")
    return int(round(m))


@dataclass(frozen=True)
class SectionField:
    """Samples of a section on a node patch covering several cells.

    `values[i, j]` is the value at ((i0 + i) hx, (j0 + j) hy).
    """

    cell: Cell
    flux_quanta: int
    values: np.ndarray
    quasimomentum: tuple = (0.0, 0.0)
    origin: tuple = (0, 0)

    @property
    def Hbar(self):
        return mean_field(self.cell, self.flux_quanta)

    def coords(self):
        i0, j0 = self.origin
        n1, n2 = self.values.shape
        x = (i0 + np.arange(n1)) * self.cell.hx
        y = (j0 + np.arange(n2)) * self.cell.hy
        return np.meshgrid(x, y, indexing="ij")


def magnetic_translate(s: SectionField, direction: int, Hbar=None, strict=True) -> SectionField:
    """(T̂_k s)(z) = e^{i f_k(z)} s(z + T_k) on the patch shrunk by one period.

    `Hbar` overrides the field of the section; with `strict` a non-integer
    flux is rejected because Bloch sectors are then ill-defined.
    """
    cell = s.cell
    if Hbar is None:
        Hbar = s.Hbar
    elif strict:
        check_integer_flux(cell, Hbar)
    n = cell.N1 if direction == 1 else cell.N2
    if direction == 1:
        shifted = s.values[n:, :]
        base = SectionField(cell, s.flux_quanta, s.values[:-n, :], s.quasimomentum, s.origin)
    elif direction == 2:
        shifted = s.values[:, n:]
        base = SectionField(cell, s.flux_quanta, s.values[:, :-n], s.quasimomentum, s.origin)
    else:
        raise ValueError("direction must be 1 or 2")
    X, Y = base.coords()
    phase = np.exp(1j * translation_phase(direction, Hbar, cell, X, Y))
    return replace(base, values=phase * shifted)


def bloch_residual(s: SectionField) -> float:
    """Relative defect of T̂_k s = e^{i p_k T_k} s for k = 1, 2."""
    worst = 0.0
    for k, T in ((1, s.cell.T1), (2, s.cell.T2)):
        t = magnetic_translate(s, k)
        n1, n2 = t.values.shape
        ref = np.exp(1j * s.quasimomentum[k - 1] * T) * s.values[:n1, :n2]
        scale = np.abs(ref).max()
        worst = max(worst, float(np.abs(t.values - ref).max() / scale))
    return worst


def commutator_phase(cell: Cell, Hbar: float) -> float:
    """Phase θ with T̂₂T̂₁ = e^{iθ} T̂₁T̂₂ for the symmetric-gauge translations."""
    return -Hbar * cell.area


__all__ = [
    "FluxQuantizationError",
    "OperatorCoefficients",
    "apply_operator",
    "SectionField",
    "bloch_residual",
    "canonical_phi",
    "check_integer_flux",
    "commutator_phase",
    "flux",
    "gauge_transform",
    "magnetic_translate",
    "mean_field",
    "operator_from_fields",
    "potential_from_phi",
    "translation_phase",
]
