"""Self-adjoint Jacobi operators on a lattice window and their factorizations.

L ψ_n = v_n ψ_n + c_{n−1} ψ_{n−1} + c_n ψ_{n+1}.  On a window of M sites
starting at label `start`, v has M entries and c has M − 1 (c[i] couples
sites i and i + 1).

Kind I:  L + α = Q Q⁺,  Q⁺ = a_n + b_n T,         v_n + α = a_n² + b_{n−1}²,  c_n = a_n b_n.
Kind II: L + α = R R⁺,  R = p_n + q_n T,
         R⁺ = p_n + q_{n−1} T⁻¹,                 v_n + α = p_n² + q_n²,      c_n = q_n p_{n+1}.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class FactorizationError(ValueError):
    """Riccati recursion hit a negative square (real branch) or a zero divisor."""

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


@dataclass(frozen=True)
class Jacobi1DOp:
    v: np.ndarray
    c: np.ndarray
    start: int = 0
    domain: str = "whole_line"

    def __post_init__(self):
        v = np.asarray(self.v)
        c = np.asarray(self.c)
        if c.shape[0] != v.shape[0] - 1:
            raise ValueError("need len(c) == len(v) - 1")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", c)

    @property
    def M(self):
        return len(self.v)

    @property
    def sites(self):
        return np.arange(self.start, self.start + self.M)

    def matrix(self):
        dtype = complex if np.iscomplexobj(self.v) or np.iscomplexobj(self.c) else float
        A = np.diag(self.v.astype(dtype))
        A += np.diag(self.c.astype(dtype), 1) + np.diag(self.c.astype(dtype), -1)
        return A

    def shifted(self, alpha):
        return Jacobi1DOp(self.v + alpha, self.c, self.start, self.domain)

    def restrict(self, lo, hi):
        """Sites lo..hi (labels, inclusive)."""
        i, j = lo - self.start, hi - self.start
        return Jacobi1DOp(self.v[i : j + 1], self.c[i:j], lo, self.domain)


@dataclass(frozen=True)
class Factorization1D:
    kind: str
    alpha: float
    first: np.ndarray  # a (kind I) or p (kind II), one per site
    second: np.ndarray  # b_n for sites 0..M−2 (kind I) or q_n for sites 0..M−1 with q_{M−1} = seed (kind II)
    seed: object
    op: Jacobi1DOp

    @property
    def a(self):
        return self.first if self.kind == "I" else None

    @property
    def b(self):
        return self.second if self.kind == "I" else None

    @property
    def p(self):
        return self.first if self.kind == "II" else None

    @property
    def q(self):
        return self.second if self.kind == "II" else None


def _sqrt(x, allow_complex, site):
    if isinstance(x, Fraction):
        num, den = x.numerator, x.denominator
        rn, rd = math.isqrt(abs(num)), math.isqrt(den)
        if x >= 0 and rn * rn == num and rd * rd == den:
            return Fraction(rn, rd)
        x = float(x)
    if isinstance(x, complex) or x < 0:
        if not allow_complex:
            raise FactorizationError(f"negative square {x!r} at site {site}", site=site)
        return cmath.sqrt(x)
    return math.sqrt(x)


def _div(a, b, site):
    if b == 0:
        raise FactorizationError(f"zero divisor at site {site}", site=site)
    return a / b


def factorize_1d(L: Jacobi1DOp, kind="I", alpha=0.0, seed=0.0, allow_complex=False) -> Factorization1D:
    """Solve the discrete Riccati recursion.

    Kind I runs upward from seed = b_{start−1}; kind II runs downward from
    seed = q_{last}.
    """
    M = L.M
    v = [x + alpha for x in L.v.tolist()]
    c = L.c.tolist()
    if kind == "I":
        a, b = [], []
        prev = seed
        for i in range(M):
            a.append(_sqrt(v[i] - prev * prev, allow_complex, L.start + i))
            if i < M - 1:
                prev = _div(c[i], a[i], L.start + i)
                b.append(prev)
        return Factorization1D("I", alpha, np.array(a), np.array(b), seed, L)
    if kind == "II":
        p = [None] * M
        q = [None] * M
        q[M - 1] = seed
        for i in range(M - 1, -1, -1):
            p[i] = _sqrt(v[i] - q[i] * q[i], allow_complex, L.start + i)
            if i > 0:
                q[i - 1] = _div(c[i - 1], p[i], L.start + i)
        return Factorization1D("II", alpha, np.array(p), np.array(q), seed, L)
    raise ValueError(f"unknown factorization kind {kind!r}")


def reconstruction_residual(F: Factorization1D) -> float:
    """max deviation of the kind's identities from (v + α, c) on the window."""
    L = F.op
    v = L.v + F.alpha
    if F.kind == "I":
        a, b = F.a, F.b
        prev = np.concatenate([[F.seed], b])
        r1 = np.abs(a * a + prev * prev - v).max()
        r2 = np.abs(a[:-1] * b - L.c).max() if L.M > 1 else 0.0
    else:
        p, q = F.p, F.q
        r1 = np.abs(p * p + q * q - v).max()
        r2 = np.abs(q[:-1] * p[1:] - L.c).max() if L.M > 1 else 0.0
    return float(max(r1, r2))


def darboux_1d(F: Factorization1D) -> Jacobi1DOp:
    """Q⁺Q (kind I, sites start..last−1) or R⁺R (kind II, sites start+1..last)."""
    L = F.op
    if F.kind == "I":
        a, b = F.a, F.b
        v = a[:-1] * a[:-1] + b * b
        c = a[1:-1] * b[:-1]
        return Jacobi1DOp(v, c, L.start, L.domain)
    p, q = F.p, F.q
    v = p[1:] * p[1:] + q[:-1] * q[:-1]
    c = p[1:-1] * q[1:-1]
    return Jacobi1DOp(v, c, L.start + 1, L.domain)


def operator_distance(L1: Jacobi1DOp, L2: Jacobi1DOp, shift=0.0) -> float:
    """max |L1 − L2 − shift| on the common window."""
    lo = max(L1.start, L2.start)
    hi = min(L1.start + L1.M, L2.start + L2.M) - 1
    if hi < lo:
        raise ValueError("windows do not overlap")
    A, B = L1.restrict(lo, hi), L2.restrict(lo, hi)
    dv = np.abs(A.v - B.v - shift).max()
    dc = np.abs(A.c - B.c).max() if len(A.c) else 0.0
    return float(max(dv, dc))


def cyclic_chain_1d(L: Jacobi1DOp, alphas, seeds=None, allow_complex=True):
    """Apply B_{α_1}, …, B_{α_N} (kind I) and report closure data.

    The report contains the closure distance ‖L_N − L_0‖, the best constant
    shift s (mean diagonal difference) and the residual ‖L_N − L_0 − s‖.
    """
    if seeds is None:
        seeds = [0.0] * len(alphas)
    ops = [L]
    for j, (alpha, seed) in enumerate(zip(alphas, seeds)):
        try:
            F = factorize_1d(ops[-1], "I", alpha, seed, allow_complex)
        except FactorizationError as exc:
            raise FactorizationError(f"chain step {j + 1}: {exc}", site=exc.site) from exc
        ops.append(darboux_1d(F))
    last = ops[-1]
    lo, hi = last.start, last.start + last.M - 1
    A, B = last.restrict(lo, hi), L.restrict(lo, hi)
    shift = complex(np.mean(A.v - B.v))
    shift = shift.real if abs(shift.imag) < 1e-14 else shift
    return {
        "steps": len(alphas),
        "alpha_sum": complex(sum(alphas)).real if np.isrealobj(np.asarray(alphas)) else complex(sum(alphas)),
        "closure_distance": operator_distance(last, L),
        "shift": shift,
        "shift_residual": operator_distance(last, L, shift),
        "operators": ops,
    }
