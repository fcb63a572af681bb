"""Toda-lattice form of a Laplace chain and its zero-curvature representation.

φ_0 = 0, φ_j = φ_{j−1} + f_j turns the chain into
    ½Δφ_j = e^{φ_{j+1}−φ_j} − e^{φ_j−φ_{j−1}} + h
with a j-independent correction h (equal to −H_1).
"""

from dataclasses import dataclass, field

import numpy as np

from ..field_core import PeriodicScalarField, d, dbar, laplacian


class ChainLengthError(ValueError):
    """Not enough chain entries (or matrix size mismatch)."""


@dataclass
class TodaField:
    cell: object
    phis: list
    h: PeriodicScalarField = None
    residuals: list = field(default_factory=list)
    h_spread: float = 0.0

    @property
    def max_residual(self):
        return max(self.residuals) if self.residuals else 0.0


def toda_raw_residual(phis, j):
    """½Δφ_j − (e^{φ_{j+1}−φ_j} − e^{φ_j−φ_{j−1}}) for an interior index j."""
    return 0.5 * laplacian(phis[j]) - ((phis[j + 1] - phis[j]).exp() - (phis[j] - phis[j - 1]).exp())


def toda_substitute(chain) -> TodaField:
    if len(chain) < 3:
        raise ChainLengthError("Toda substitution needs at least three chain entries")
    phis = [chain.f[0] * 0.0]
    for fj in chain.f[1:]:
        phis.append(phis[-1] + fj)
    raw = [toda_raw_residual(phis, j) for j in range(1, len(phis) - 1)]
    stack = np.array([r.values for r in raw])
    h = PeriodicScalarField(chain.cell, stack.mean(axis=0))
    spread = float(np.abs(stack - h.values).max())
    residuals = [(r - h).max_abs() for r in raw]
    return TodaField(chain.cell, phis, h, residuals, spread)


def _toda_parts(phis):
    N = len(phis)
    if N < 2:
        raise ChainLengthError("zero-curvature pair needs N ≥ 2")
    cell = phis[0].cell
    if any(p.cell != cell for p in phis):
        raise ChainLengthError("fields live on different cells")
    return N, cell


def _pq(phis, lam):
    """P, Q as arrays of shape (N, N, N1, N2) plus the derivative pieces."""
    N, cell = _toda_parts(phis)
    shape = (N, N, cell.N1, cell.N2)
    P = np.zeros(shape, complex)
    Q = np.zeros(shape, complex)
    dbarP = np.zeros(shape, complex)
    dQ = np.zeros(shape, complex)
    for j in range(N):
        dphi = d(phis[j])
        P[j, j] = -dphi.values
        dbarP[j, j] = -dbar(dphi).values
        P[j, (j + 1) % N] += 1.0 if j + 1 < N else lam
        nxt = phis[(j + 1) % N]
        q = -2.0 * (nxt - phis[j]).exp()
        corner = 1.0 if j + 1 < N else 1.0 / lam
        Q[(j + 1) % N, j] += corner * q.values
        dQ[(j + 1) % N, j] += corner * d(q).values
    return P, Q, dbarP, dQ


def zero_curvature_residual(phis, lam=1.0) -> float:
    """max |∂Q − ∂̄P + [P, Q]| over the grid for the period-N closure φ_{j+N} = φ_j."""
    if isinstance(phis, TodaField):
        phis = phis.phis
    P, Q, dbarP, dQ = _pq(list(phis), lam)
    comm = np.einsum("ijxy,jkxy->ikxy", P, Q) - np.einsum("ijxy,jkxy->ikxy", Q, P)
    return float(np.abs(dQ - dbarP + comm).max())


def toda_linearized_residual(xi, phis) -> float:
    """max_j |½Δξ_j − e^{φ_{j+1}−φ_j}(ξ_{j+1}−ξ_j) + e^{φ_j−φ_{j−1}}(ξ_j−ξ_{j−1})|, period N."""
    if isinstance(phis, TodaField):
        phis = phis.phis
    phis = list(phis)
    if len(xi) != len(phis):
        raise ChainLengthError(f"{len(xi)} variations for {len(phis)} fields")
    N = len(phis)
    worst = 0.0
    for j in range(N):
        up, dn = (j + 1) % N, (j - 1) % N
        r = (
            0.5 * laplacian(xi[j])
            - (phis[up] - phis[j]).exp() * (xi[up] - xi[j])
            + (phis[j] - phis[dn]).exp() * (xi[j] - xi[dn])
        )
        worst = max(worst, r.max_abs())
    return worst


def toda_rhs(phis):
    """Right-hand sides 2(e^{φ_{j+1}−φ_j} − e^{φ_j−φ_{j−1}}) of Δφ_j, period N."""
    N = len(phis)
    return [
        2.0 * ((phis[(j + 1) % N] - phis[j]).exp() - (phis[j] - phis[(j - 1) % N]).exp())
        for j in range(N)
    ]
