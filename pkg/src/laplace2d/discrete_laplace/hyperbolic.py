"""Hyperbolic lattice operators L = 1 + a T₁ + b T₂ + c T₁T₂ on Z².

Coefficients are site maps {(i, j): Fraction}.  Every operation evaluates
only where all of its inputs exist, so domains shrink by one cell per
application and are tracked implicitly by the keys.

Factorization   L = f [(1 + u T₁)(1 + v T₂) + w]
    f_n = a_{n−T₁} b_n / c_{n−T₁},  w = 1/f − 1,  u = a/f,  v = b/f.
Laplace step    ψ̃ = (1 + v T₂) ψ,  L̃ = w/(1+w) [(1 + v T₂) w⁻¹ (1 + u T₁) + 1]
    ã_n = a_n,  b̃_n = b_n w_n / w_{n+T₂},
    c̃_n = b_n a_{n+T₂} (1 + w_{n+T₂}) w_n / w_{n+T₂}.
Inverse         L = g [(1 + p T₂)(1 + q T₁) + s],  ψ̃ = (1 + q T₁) ψ
    g_n = b_{n−T₂} a_n / c_{n−T₂},  s = 1/g − 1,  q = a/g,  p = b/g.
Invariants      1 + w_n = c_{n−T₁} / (a_{n−T₁} b_n),
                e^{H_n} = a_n b_{n+T₁} / (b_n a_{n+T₂}).
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from ..stencil import StencilOp

T1 = (1, 0)
T2 = (0, 1)
T12 = (1, 1)


class DegenerateOperatorError(ZeroDivisionError):
    """A division by zero at a lattice site."""

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


def add(n, s):
    return (n[0] + s[0], n[1] + s[1])


def sub(n, s):
    return (n[0] - s[0], n[1] - s[1])


def rect(N1, N2, origin=(0, 0)):
    """Sites of the N1 × N2 rectangle starting at origin."""
    return [(origin[0] + i, origin[1] + j) for i in range(N1) for j in range(N2)]


def _div(x, y, site, what):
    if y == 0:
        raise DegenerateOperatorError(f"zero {what} at site {site}", site=site)
    return x / y


@dataclass
class HyperbolicOp:
    a: dict
    b: dict
    c: dict

    @property
    def sites(self):
        return sorted(set(self.a) & set(self.b) & set(self.c))

    def stencil(self):
        return StencilOp.from_table({(0, 0): {n: Fraction(1) for n in self.sites}, T1: self.a, T2: self.b, T12: self.c}, 2)

    def apply(self, psi, sites=None):
        """(Lψ)_n on every site where the operator and ψ's stencil are defined."""
        out = {}
        for n in self.sites if sites is None else sites:
            if all(add(n, s) in psi for s in ((0, 0), T1, T2, T12)):
                out[n] = psi[n] + self.a[n] * psi[add(n, T1)] + self.b[n] * psi[add(n, T2)] + self.c[n] * psi[add(n, T12)]
        return out

    def gauge(self, g):
        """g L g⁻¹ for a site map g (leading coefficient stays 1)."""
        a, b, c = {}, {}, {}
        for n in self.sites:
            if all(add(n, s) in g for s in ((0, 0), T1, T2, T12)):
                a[n] = self.a[n] * g[n] / g[add(n, T1)]
                b[n] = self.b[n] * g[n] / g[add(n, T2)]
                c[n] = self.c[n] * g[n] / g[add(n, T12)]
        return HyperbolicOp(a, b, c)

    @classmethod
    def constant(cls, a, b, c, sites):
        return cls({n: Fraction(a) for n in sites}, {n: Fraction(b) for n in sites}, {n: Fraction(c) for n in sites})


@dataclass
class FactorizedHyp:
    f: dict
    u: dict
    v: dict
    w: dict
    op: HyperbolicOp

    def expand(self):
        """Coefficients (1, a, b, c) of f[(1+uT₁)(1+vT₂)+w] where defined."""
        one, a, b, c = {}, {}, {}, {}
        for n in self.f:
            one[n] = self.f[n] * (1 + self.w[n])
            a[n] = self.f[n] * self.u[n]
            b[n] = self.f[n] * self.v[n]
            if add(n, T1) in self.v:
                c[n] = self.f[n] * self.u[n] * self.v[add(n, T1)]
        return one, HyperbolicOp(a, b, c)

    def stencil(self):
        """f[(1+uT₁)(1+vT₂)+w] built by operator algebra (an independent expansion)."""
        F = StencilOp.from_table({(0, 0): self.f}, 2)
        U = StencilOp.identity(2) + StencilOp.from_table({T1: self.u}, 2)
        V = StencilOp.identity(2) + StencilOp.from_table({T2: self.v}, 2)
        W = StencilOp.from_table({(0, 0): self.w}, 2)
        return F * (U * V + W)


def factorize_hyperbolic(L: HyperbolicOp) -> FactorizedHyp:
    f, u, v, w = {}, {}, {}, {}
    for n in L.sites:
        m = sub(n, T1)
        if m not in L.a or m not in L.c:
            continue
        fn = _div(L.a[m] * L.b[n], L.c[m], m, "c")
        if fn == 0:
            raise DegenerateOperatorError(f"f vanishes at site {n}", site=n)
        f[n] = fn
        w[n] = 1 / fn - 1
        u[n] = L.a[n] / fn
        v[n] = L.b[n] / fn
    return FactorizedHyp(f, u, v, w, L)


def laplace_step_hyperbolic(F: FactorizedHyp, psi=None):
    """(L̃, ψ̃) of the forward Laplace transformation; ψ̃ is None if psi is None."""
    L = F.op
    a, b, c = {}, {}, {}
    for n, wn in F.w.items():
        m = add(n, T2)
        if m not in F.w or m not in L.a:
            continue
        if wn == 0 or wn == -1:
            raise DegenerateOperatorError(f"w = {wn} at site {n}", site=n)
        wm = F.w[m]
        if wm == 0:
            raise DegenerateOperatorError(f"w = 0 at site {m}", site=m)
        a[n] = L.a[n]
        b[n] = L.b[n] * wn / wm
        c[n] = L.b[n] * L.a[m] * (1 + wm) * wn / wm
    Lt = HyperbolicOp(a, b, c)
    if psi is None:
        return Lt, None
    psit = {n: psi[n] + F.v[n] * psi[add(n, T2)] for n in F.v if n in psi and add(n, T2) in psi}
    return Lt, psit


def laplace_step_stencil(F: FactorizedHyp):
    """L̃ = w/(1+w)[(1+vT₂)w⁻¹(1+uT₁) + 1] by operator algebra."""
    pref = StencilOp.from_table({(0, 0): {n: w / (1 + w) for n, w in F.w.items()}}, 2)
    winv = StencilOp.from_table({(0, 0): {n: 1 / w for n, w in F.w.items()}}, 2)
    V = StencilOp.identity(2) + StencilOp.from_table({T2: F.v}, 2)
    U = StencilOp.identity(2) + StencilOp.from_table({T1: F.u}, 2)
    return pref * (V * winv * U + 1)


@dataclass
class InverseFactorizedHyp:
    g: dict
    p: dict
    q: dict
    s: dict
    op: HyperbolicOp


def factorize_hyperbolic_inverse(L: HyperbolicOp) -> InverseFactorizedHyp:
    g, p, q, s = {}, {}, {}, {}
    for n in L.sites:
        m = sub(n, T2)
        if m not in L.b or m not in L.c:
            continue
        gn = _div(L.b[m] * L.a[n], L.c[m], m, "c")
        if gn == 0:
            raise DegenerateOperatorError(f"g vanishes at site {n}", site=n)
        g[n] = gn
        s[n] = 1 / gn - 1
        q[n] = L.a[n] / gn
        p[n] = L.b[n] / gn
    return InverseFactorizedHyp(g, p, q, s, L)


def inverse_laplace_step_hyperbolic(G: InverseFactorizedHyp, psi=None):
    """L̃ = s/(1+s)[(1+qT₁)s⁻¹(1+pT₂) + 1],  ψ̃ = (1 + qT₁)ψ."""
    L = G.op
    a, b, c = {}, {}, {}
    for n, sn in G.s.items():
        m = add(n, T1)
        if m not in G.s or m not in L.b:
            continue
        if sn == 0 or sn == -1 or G.s[m] == 0:
            raise DegenerateOperatorError(f"s degenerate near site {n}", site=n)
        sm = G.s[m]
        b[n] = L.b[n]
        a[n] = L.a[n] * sn / sm
        c[n] = L.a[n] * L.b[m] * (1 + sm) * sn / sm
    Lt = HyperbolicOp(a, b, c)
    if psi is None:
        return Lt, None
    psit = {n: psi[n] + G.q[n] * psi[add(n, T1)] for n in G.q if n in psi and add(n, T1) in psi}
    return Lt, psit


@dataclass
class InvariantPair:
    """Gauge invariants: potential w and the field stored as e^{H}."""

    w: dict
    expH: dict


def invariants_of(L: HyperbolicOp) -> InvariantPair:
    w, eH = {}, {}
    for n in L.sites:
        m = sub(n, T1)
        if m in L.a and m in L.c:
            w[n] = _div(L.c[m], L.a[m] * L.b[n], n, "a·b") - 1
        n1, n2 = add(n, T1), add(n, T2)
        if n1 in L.b and n2 in L.a:
            eH[n] = _div(L.a[n] * L.b[n1], L.b[n] * L.a[n2], n, "b·a")
    return InvariantPair(w, eH)


def invariant_step(inv: InvariantPair) -> InvariantPair:
    """Laplace step expressed through (w, e^H) only."""
    w, eH = inv.w, inv.expH
    eHt, wt = {}, {}
    for n, e in eH.items():
        ns = [add(n, s) for s in (T1, T2, T12)]
        if n not in w or any(m not in w for m in ns):
            continue
        n1, n2, n12 = ns
        den = w[n] * w[n12]
        eHt[n] = _div(e * w[n2] * w[n1], den, n, "w")
        wt[n1] = _div(1 + w[n2], eHt[n], n, "e^H") - 1
    return InvariantPair(wt, eHt)


def toda_relation_residual(inv_k: InvariantPair, inv_k1: InvariantPair) -> Fraction:
    """max |e^{H^{(k+1)}_n} − (1 + w^{(k)}_{n+T₂}) / (1 + w^{(k+1)}_{n+T₁})| on common sites."""
    worst = Fraction(0)
    for n, e in inv_k1.expH.items():
        n1, n2 = add(n, T1), add(n, T2)
        if n2 in inv_k.w and n1 in inv_k1.w:
            worst = max(worst, abs(e - (1 + inv_k.w[n2]) / (1 + inv_k1.w[n1])))
    return worst


def hyperbolic_solve(L: HyperbolicOp, boundary: dict, N1: int, N2: int, origin=(0, 0)):
    """Solve Lψ = 0 on a rectangle from data on its first row and first column.

    boundary must hold ψ at (i0 + i, j0) and (i0, j0 + j); the recursion
    ψ_{n+T₁+T₂} = −(ψ_n + a_n ψ_{n+T₁} + b_n ψ_{n+T₂}) / c_n fills the rest.
    """
    i0, j0 = origin
    psi = dict(boundary)
    for i in range(N1 - 1):
        for j in range(N2 - 1):
            n = (i0 + i, j0 + j)
            if n not in L.c:
                raise KeyError(f"operator undefined at {n}")
            psi[add(n, T12)] = -_div(psi[n] + L.a[n] * psi[add(n, T1)] + L.b[n] * psi[add(n, T2)], L.c[n], n, "c")
    return psi


def cyclic_m2_step(w: dict, C, N1: int, N2: int, origin=(0, 0)):
    """Fill a rectangle with the m = 2 cyclic map from first-row/first-column data.

    w_{n+T₁+T₂} = (C + w_{n+T₁})(C + w_{n+T₂}) / (w_n (1 + w_{n+T₁})(1 + w_{n+T₂})).
    """
    C = Fraction(C)
    if C == 1:
        raise DegenerateOperatorError("C = 1: the cyclic m = 2 map degenerates")
    i0, j0 = origin
    out = dict(w)
    for i in range(N1 - 1):
        for j in range(N2 - 1):
            n = (i0 + i, j0 + j)
            x, y, z = out[n], out[add(n, T1)], out[add(n, T2)]
            out[add(n, T12)] = _div((C + y) * (C + z), x * (1 + y) * (1 + z), n, "denominator")
    return out


def cyclic_m2_invariants(w0: dict, C) -> InvariantPair:
    """(w⁰, e^{H⁰}) of the m = 2 cycle, with w¹ = C/w⁰ and e^{H⁰_n} = (1 + w¹_{n+T₂}) / (1 + w⁰_{n+T₁})."""
    C = Fraction(C)
    eH = {}
    for n in w0:
        n1, n2 = add(n, T1), add(n, T2)
        if n1 in w0 and n2 in w0:
            eH[n] = _div(1 + C / w0[n2], 1 + w0[n1], n, "1 + w")
    return InvariantPair(dict(w0), eH)


def fixed_point_m2(C):
    """Constant solutions of the m = 2 map: w² = C (exact when C is a rational square)."""
    C = Fraction(C)
    num, den = C.numerator, C.denominator
    rn, rd = isqrt(num) if num >= 0 else -1, isqrt(den)
    if num >= 0 and rn * rn == num and rd * rd == den:
        r = Fraction(rn, rd)
        return [r, -r] if r else [r]
    return []
