"""The two difference analogs of the harmonic oscillator.

First oscillator on Z⁺ (sites k ≥ 1, ψ_0 = 0):
    L± = Q± Q⁺±,  Q⁺± = 1 ± √(hk) T,  spectrum {m h}.
Second oscillator on Z:
    L(c, a) = Q Q⁺,  Q⁺ = 1 + c aⁿ T,  Q = 1 + c a^{n−1} T⁻¹,
    spectrum in [0, 1): 1 − a^{−2n} (a > 1, n ≥ 0) or 1 − a^{2n} (a < 1, n ≥ 1).
"""

import math
from fractions import Fraction

import numpy as np

from ..field_core import theta_series
from ..stencil import StencilOp
from .jacobi import Jacobi1DOp


class QuantizationError(ValueError):
    """The half-line reduction requires an integer offset l."""


class DegenerateLadderError(ValueError):
    """a ∈ {0, ±1} or c = 0."""


class WindowError(ValueError):
    """Truncation window too small for the eigenvector tails."""


TAIL_TOL = 1e-14


# --- first oscillator ---------------------------------------------------------


def oscillator1_build(h, l=0, M=500, sign=+1) -> Jacobi1DOp:
    """Truncated L± = Q±Q⁺± on sites k = 1..M (labels n = l + k)."""
    if h <= 0:
        raise ValueError("h must be positive")
    if l != int(l):
        raise QuantizationError(f"offset l = {l} is not an integer; L does not preserve H_l")
    k = np.arange(1, M + 1, dtype=float)
    b = sign * np.sqrt(h * k)
    # L = QQ⁺ with Q⁺ = 1 + b_k T: diagonal 1 + b_{k−1}², off-diagonal b_k
    v = 1.0 + np.concatenate([[0.0], b[:-1] ** 2])
    return Jacobi1DOp(v, b[:-1], int(l) + 1, "half_line")


def oscillator1_qplus(h, M, sign=+1):
    k = np.arange(1, M + 1, dtype=float)
    return np.eye(M) + np.diag(sign * np.sqrt(h * k[:-1]), 1)


def oscillator1_ground_state(h, M, sign=+1):
    """ψ_{0k} = (∓1)^{k−1}/√(h^{k−1}(k−1)!), annihilated by Q⁺±."""
    k = np.arange(1, M + 1)
    logabs = -0.5 * ((k - 1) * math.log(h) + np.array([math.lgamma(j) for j in k]))
    return (-sign) ** (k - 1) * np.exp(logabs)


def poisson_normalization(h):
    """Σ_{k≥1} ψ_{0k}² = e^{1/h}."""
    return math.exp(1.0 / h)


def charlier_poly(m: int, k, h):
    """P_m(k) from P_j(k) = P_{j−1}(k) − h(k−1) P_{j−1}(k−1), P_0 = 1."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    # P_m(k) only needs P_{m−1} at k and k−1: tabulate P_j at k−m+j..k
    vals = [1] * (m + 1)
    for j in range(1, m + 1):
        vals = [vals[i + 1] - h * (k - (m - j) + i - 1) * vals[i] for i in range(m - j + 1)]
    return vals[0]


def sign_changes(vec, rel_floor=1e-12):
    v = vec[np.abs(vec) > rel_floor * np.abs(vec).max()]
    return int(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))


# --- second oscillator --------------------------------------------------------


def _check_ca(c, a):
    if c == 0 or a in (0, 1, -1):
        raise DegenerateLadderError(f"degenerate ladder for c = {c}, a = {a}")


def q_plus_op(c, a):
    """Q⁺(c, a) = 1 + c aⁿ T as an exact stencil."""
    return StencilOp({(0,): lambda n: 1, (1,): lambda n: c * _pow(a, n[0])}, 1)


def q_op(c, a):
    """Q(c, a) = 1 + c a^{n−1} T⁻¹."""
    return StencilOp({(0,): lambda n: 1, (-1,): lambda n: c * _pow(a, n[0] - 1)}, 1)


def _pow(a, n):
    if isinstance(a, Fraction):
        return a**n
    return float(a) ** n


def oscillator2_build(c, a, M=50, start=None):
    """Window of L(c, a) = QQ⁺ and the ladder-relation residual on its interior."""
    _check_ca(c, a)
    if start is None:
        start = -(M // 2)
    n = np.arange(start, start + M)
    exact = isinstance(c, Fraction) and isinstance(a, Fraction)
    if exact:
        v = np.array([1 + c * c * a ** (2 * k - 2) for k in n], dtype=object)
        cc = np.array([c * a**k for k in n[:-1]], dtype=object)
    else:
        v = 1.0 + c * c * float(a) ** (2.0 * n - 2)
        cc = c * float(a) ** n[:-1].astype(float)
    L = Jacobi1DOp(v, cc, int(start), "whole_line")
    return L, relation4_residual(c, a, [(k,) for k in n[1:-1]])


def relation4_residual(c, a, sites):
    """max |a²Q⁺(c,a)Q(c,a) − Q(ca²,a)Q⁺(ca²,a) − (a² − 1)| over coefficients on sites."""
    lhs = (a * a) * (q_plus_op(c, a) * q_op(c, a))
    rhs = q_op(c * a * a, a) * q_plus_op(c * a * a, a) + (a * a - 1)
    diff = (lhs - rhs).table(sites)
    return max((abs(x) for t in diff.values() for x in t.values()), default=0)


def tau(psi: dict) -> dict:
    """(τψ)_n = ψ_{1−n}."""
    return {(1 - n[0],): x for n, x in psi.items()}


def tau_relation_residual(c, a, psi: dict):
    """max |τQ(c,a)ψ − Q⁺(c,a⁻¹)τψ| on sites where both sides are defined."""
    Qa = q_op(c, a)
    Qpinv = q_plus_op(c, 1 / a)
    left = {}
    for n in psi:
        try:
            left[n] = Qa.apply(psi, n)
        except KeyError:
            pass
    left = tau(left)
    tpsi = tau(psi)
    worst = 0
    for n in left:
        try:
            worst = max(worst, abs(left[n] - Qpinv.apply(tpsi, n)))
        except KeyError:
            pass
    return worst


def oscillator2_matrix(c, a, M, start=None):
    if start is None:
        start = -(M // 2)
    L, _ = oscillator2_build(float(c), float(a), M, start)
    return L.matrix(), np.arange(start, start + M)


def _qplus_matrix(c, a, ns):
    return np.eye(len(ns)) + np.diag(c * a ** ns[:-1].astype(float), 1)


def _q_matrix(c, a, ns):
    return _qplus_matrix(c, a, ns).T


def oscillator2_ground_state(c, a, ns):
    """ψ_{0k} = (−1)^k c^{−k} a^{−(k−1)k/2}, the solution of Q⁺ψ = 0."""
    k = ns.astype(float)
    logabs = -k * math.log(abs(c)) - 0.5 * (k - 1) * k * math.log(abs(a))
    sgn = (-np.sign(c)) ** ns
    if a < 0:
        sgn = sgn * np.sign(a) ** (((ns - 1) * ns // 2) % 2)
    # tails underflow to exact zeros; clipping would plant subnormal garbage
    # that the ladder operators amplify by a^{2n}
    with np.errstate(under="ignore", over="ignore"):
        return sgn * np.exp(logabs)


def _check_tails(vec, label):
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.abs(vec) ** 2
        total = w.sum()
    if not np.isfinite(total) or total == 0:
        raise WindowError(f"{label}: eigenvector not representable on the window")
    with np.errstate(under="ignore"):
        edge = (w[:3].sum() + w[-3:].sum()) / total
    if edge > TAIL_TOL:
        raise WindowError(f"{label}: tail mass {edge:.2e} exceeds {TAIL_TOL:g}; enlarge the window")
    return edge


def oscillator2_eigenpairs(c, a, nmax=5, M=400):
    """[(n, λ_n, ψ_n, residual)] from the ladder constructions, residual relative."""
    _check_ca(c, a)
    if a <= 0:
        raise DegenerateLadderError("eigenpair ladder implemented for a > 0")
    Lmat, ns = oscillator2_matrix(c, a, M)
    out = []
    if a > 1:
        for n in range(0, nmax + 1):
            psi = oscillator2_ground_state(c * a ** (2 * n), a, ns)
            for j in reversed(range(n)):
                psi = _q_matrix(c * a ** (2 * j), a, ns) @ psi
            lam = 1 - a ** (-2 * n)
            out.append(_finish(n, lam, psi, Lmat))
    else:
        for n in range(1, nmax + 1):
            cn = c / a ** (2 * n - 2)
            # ψ_1(c', a) = τ ψ_0(c'/a², 1/a): component at site k is ψ_0 at 1 − k
            psi = oscillator2_ground_state(cn / a**2, 1 / a, 1 - ns)
            for j in reversed(range(1, n)):
                psi = _qplus_matrix(c / a ** (2 * j), a, ns) @ psi
            lam = 1 - a ** (2 * n)
            out.append(_finish(n, lam, psi, Lmat))
    return out


def _finish(n, lam, psi, Lmat):
    _check_tails(psi, f"level {n}")
    psi = psi / np.linalg.norm(psi)
    res = np.linalg.norm(Lmat @ psi - lam * psi)
    return n, lam, psi, float(res)


def truncated_spectrum(c, a, M=400, count=None):
    """Raw truncated eigenvalues; those ≥ 1 are truncation artifacts, not a continuum claim."""
    Lmat, _ = oscillator2_matrix(c, a, M)
    ev = np.linalg.eigvalsh(Lmat)
    below = ev[ev < 1]
    above = ev[ev >= 1]
    if count is not None:
        below = below[:count]
    return {"below_one": below, "truncation_artifacts": above}


# --- theta-normalized ground state ----------------------------------------------


def theta_ground_state(gamma, m, x):
    """Φ₀(x) = Θ[(2m+1−2x) ln γ | 2 ln γ]^{−1/2}.

    Satisfies Φ₀(x) = γ^{x−m} Φ₀(x+1) and Σ_{k∈δ+Z} Φ₀(k)² = 1 for every δ.
    """
    if gamma <= 0 or gamma == 1:
        raise ValueError("gamma must be positive and different from 1")
    lg = math.log(gamma)
    if lg < 0:
        raise ValueError("gamma < 1 makes the theta series diverge")
    x = np.asarray(x, dtype=float)
    return theta_series((2 * m + 1 - 2 * x) * lg, 2 * lg) ** -0.5


def theta_ground_state_periodic_part(gamma, m, x):
    """g(x) = Φ₀(x) γ^{−x(2m+1−x)/2}, a function of period 1."""
    x = np.asarray(x, dtype=float)
    return theta_ground_state(gamma, m, x) * gamma ** (-x * (2 * m + 1 - x) / 2)


def lattice_normalization(gamma, m, delta, K=None):
    """Σ_{k∈δ+Z} Φ₀(k)², summed over a range wide enough for the Gaussian tails."""
    if K is None:
        K = int(np.ceil(np.sqrt(80 / math.log(gamma)))) + abs(m) + 5
    ks = delta + np.arange(m - K, m + K + 1)
    return float(np.sum(theta_ground_state(gamma, m, ks) ** 2))
