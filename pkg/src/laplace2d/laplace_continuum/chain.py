"""Laplace transformation of (H, V), its inverse and iterated chains.

With L = ½(∂̄+B)(∂+A) + V the transformation is
    H̃ = H + ½Δ ln V,    Ṽ = V + H̃,
and in terms of f_j = ln V_j the chain reads
    H_{j+1} = H_j + ½Δ f_j,    e^{f_{j+1}} = e^{f_j} + H_{j+1}.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..field_core import (
    OperatorCoefficients,
    PeriodicScalarField,
    d,
    dbar,
    flux,
    laplacian,
)


class PositivityError(ValueError):
    """V must be positive for ln V to exist."""

    def __init__(self, message, link=None, location=None):
        super().__init__(message)
        self.link = link
        self.location = location


class GaugeTagError(ValueError):
    """Operation requires coefficients in the real Lorentz gauge."""


def _check_positive(V: PeriodicScalarField, link=None):
    vals = V.values
    if V.parity != "real" or not np.all(vals > 0):
        idx = np.unravel_index(np.argmin(np.real(vals)), vals.shape)
        where = (float(idx[0] * V.cell.hx), float(idx[1] * V.cell.hy))
        tag = "" if link is None else f" at link {link}"
        raise PositivityError(
            f"potential is not positive{tag}: min {np.real(vals).min():.4g} at (x, y) = {where}",
            link=link,
            location=where,
        )


def laplace_step(H: PeriodicScalarField, V: PeriodicScalarField):
    """(H, V) -> (H + ½Δ ln V, V + H̃)."""
    _check_positive(V)
    Ht = H + 0.5 * laplacian(V.log())
    return Ht, V + Ht


def inverse_laplace_step(H: PeriodicScalarField, W: PeriodicScalarField):
    """Inverse of laplace_step given the field H and U-potential W = V − H of the image.

    Returns (H − ½Δ ln W, W); laplace_step of the result gives back (H, W + H).
    """
    _check_positive(W)
    return H - 0.5 * laplacian(W.log()), W


def laplace_step_real_gauge(L: OperatorCoefficients) -> OperatorCoefficients:
    """Real-gauge representative of the transformed operator.

    A → A − ∂Q, B → B + ∂̄Q with Q = ½ ln V; zero modes map by ψ → e^{−Q}(∂+A)ψ.
    """
    if L.gauge_tag != "real_lorentz":
        raise GaugeTagError(f"expected real_lorentz coefficients, got {L.gauge_tag!r}")
    _check_positive(L.V)
    Q = 0.5 * L.V.log()
    out = replace(L, A_per=L.A_per - d(Q), B_per=L.B_per + dbar(Q))
    return replace(out, V=(L.V + out.H).real())


def transport_zero_mode(L: OperatorCoefficients, psi: PeriodicScalarField) -> PeriodicScalarField:
    """ψ → e^{−Q}(∂+A)ψ, Q = ½ ln V (periodic sections only)."""
    _check_positive(L.V)
    return (-0.5 * L.V.log()).exp() * (d(psi) + L.A_per * psi)


# --- chains -------------------------------------------------------------------


@dataclass
class ChainState:
    """Fields (H_j, f_j) along a Laplace chain, V_j = e^{f_j}."""

    cell: object
    H: list
    f: list
    constants: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    link_residuals: list = field(default_factory=list)

    @property
    def V(self):
        return [fj.exp() for fj in self.f]

    def __len__(self):
        return len(self.H)

    def summary(self):
        """Per-entry {flux, meanV, C_j, residual}."""
        rows = []
        for j, (Hj, fj) in enumerate(zip(self.H, self.f)):
            rows.append(
                {
                    "j": j,
                    "flux": flux(Hj),
                    "meanV": float(fj.exp().mean()),
                    "C_j": self.constants.get(j),
                    "residual": self.link_residuals[j - 1] if j > 0 else 0.0,
                }
            )
        return rows

    def to_json(self):
        return json.dumps({"flags": self.flags, "links": self.summary()}, indent=2)


def _constant_value(F: PeriodicScalarField, tol):
    """Mean of F if F is constant to relative tolerance, else None."""
    m = float(np.real(F.mean()))
    spread = float(np.abs(F.values - m).max())
    return m if spread <= tol * max(1.0, abs(m)) else None


def link_residual(H0, f0, H1, f1):
    """max residual of one recursion link."""
    r1 = (H1 - H0 - 0.5 * laplacian(f0)).max_abs()
    r2 = (f1.exp() - f0.exp() - H1).max_abs()
    return max(r1, r2)


def classify_chain(chain: ChainState, tol=1e-7):
    """Set cyclic / semi-cyclic / quasi-cyclic flags and the constants C_n."""
    n = len(chain) - 1
    H0, V0 = chain.H[0], chain.f[0].exp()
    Hn, Vn = chain.H[n], chain.f[n].exp()
    same_H = (Hn - H0).max_abs() <= tol * max(1.0, H0.max_abs())
    Cn_semi = _constant_value(Vn - V0, tol) if same_H else None
    quasi_base = (V0 - H0).max_abs() <= tol * max(1.0, V0.max_abs())
    Cn_quasi = _constant_value(Vn - Hn, tol) if quasi_base else None
    flags = {
        "semi_cyclic": Cn_semi is not None,
        "cyclic": Cn_semi is not None and abs(Cn_semi) <= tol * max(1.0, V0.max_abs()),
        "quasi_cyclic": Cn_quasi is not None,
    }
    chain.flags = flags
    if Cn_semi is not None:
        chain.constants[n] = Cn_semi
    elif Cn_quasi is not None:
        chain.constants[n] = Cn_quasi
    return flags


def chain_iterate(f0: PeriodicScalarField, H0: PeriodicScalarField, n: int, tol=1e-7) -> ChainState:
    """n Laplace steps from (H_0, V_0 = e^{f_0}); raises PositivityError naming the failing link."""
    if n < 1:
        raise ValueError("need at least one link")
    Hs, fs, res = [H0], [f0], []
    for j in range(n):
        V = fs[-1].exp()
        _check_positive(V, link=j)
        Ht, Vt = laplace_step(Hs[-1], V)
        _check_positive(Vt, link=j + 1)
        Hs.append(Ht)
        fs.append(Vt.log())
        res.append(link_residual(Hs[-2], fs[-2], Hs[-1], fs[-1]))
    chain = ChainState(f0.cell, Hs, fs, link_residuals=res)
    classify_chain(chain, tol)
    return chain


def is_constant(f: PeriodicScalarField, tol=1e-9):
    return _constant_value(f, tol) is not None
