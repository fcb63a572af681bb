"""Self-adjoint operators on the triangular lattice and their Laplace steps.

L = a_n + b_n T₁ + b_{n−T₁} T₁⁻¹ + c_n T₂ + c_{n−T₂} T₂⁻¹
      + d_{n+T₁} T₁T₂⁻¹ + d_{n+T₂} T₂T₁⁻¹,
so d_m couples the sites m − T₁ and m − T₂.

Forward factorization  L = A A⁺ + w,  A = x + y T₁ + z T₂,
    b_n = y_n x_{n+T₁},  c_n = z_n x_{n+T₂},  d_m = y_{m−T₁} z_{m−T₂},
    hence x_m² = b_{m−T₁} c_{m−T₂} / d_m: every coefficient is local and x
    is fixed up to a sign per site (a ±1 gauge that leaves A A⁺ unchanged).
Inverse factorization  L = B B⁺ + w',  B = x' + y' T₁⁻¹ + z' T₂⁻¹,
    x'_k² = b_k c_k / d_{k+T₁+T₂},  y'_n = b_{n−T₁} / x'_{n−T₁},  z'_n = c_{n−T₂} / x'_{n−T₂}.
Laplace steps  ψ̃ = A⁺ψ, L̃ = A⁺ w⁻¹ A + 1  and  ψ̃ = B⁺ψ, L̃ = B⁺ w'⁻¹ B + 1.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from ..stencil import StencilOp
from .hyperbolic import DegenerateOperatorError, _div, add, sub

T1 = (1, 0)
T2 = (0, 1)
T12 = (1, 1)
NEIGHBORS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


class TriangularFactorizationError(ValueError):
    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


@dataclass
class TriangularOp:
    a: dict
    b: dict
    c: dict
    d: dict

    def coefficient_table(self):
        """{shift: {site: value}} wherever the coefficient is defined."""
        tab = {s: {} for s in NEIGHBORS}
        for n in self.a:
            tab[(0, 0)][n] = self.a[n]
            for s, src, key in (
                ((1, 0), self.b, n),
                ((-1, 0), self.b, sub(n, T1)),
                ((0, 1), self.c, n),
                ((0, -1), self.c, sub(n, T2)),
                ((1, -1), self.d, add(n, T1)),
                ((-1, 1), self.d, add(n, T2)),
            ):
                if key in src:
                    tab[s][n] = src[key]
        return tab

    def complete_sites(self):
        """Sites where all seven coefficients are defined."""
        tab = self.coefficient_table()
        return sorted(n for n in self.a if all(n in tab[s] for s in NEIGHBORS))

    def stencil(self):
        tab = self.coefficient_table()
        sites = set(self.complete_sites())
        return StencilOp.from_table({s: {n: v for n, v in t.items() if n in sites} for s, t in tab.items()}, 2)

    def apply(self, psi):
        tab = self.coefficient_table()
        out = {}
        for n in self.complete_sites():
            if all(add(n, s) in psi for s in NEIGHBORS):
                out[n] = sum(tab[s][n] * psi[add(n, s)] for s in NEIGHBORS)
        return out

    def gauge(self, g):
        """g L g for a real site map g (keeps self-adjointness)."""
        a = {n: v * g[n] ** 2 for n, v in self.a.items() if n in g}
        b = {n: v * g[n] * g[add(n, T1)] for n, v in self.b.items() if n in g and add(n, T1) in g}
        c = {n: v * g[n] * g[add(n, T2)] for n, v in self.c.items() if n in g and add(n, T2) in g}
        d = {m: v * g[sub(m, T1)] * g[sub(m, T2)] for m, v in self.d.items() if sub(m, T1) in g and sub(m, T2) in g}
        return TriangularOp(a, b, c, d)

    @classmethod
    def from_stencil(cls, op: StencilOp, sites):
        """Read (a, b, c, d) off an operator; sites where a coefficient cannot be evaluated are skipped."""
        a, b, c, d = {}, {}, {}, {}
        for n in sites:
            for target, shift, key in ((a, (0, 0), n), (b, (1, 0), n), (c, (0, 1), n), (d, (1, -1), add(n, T1))):
                try:
                    target[key] = op.coeff(shift, n)
                except KeyError:
                    pass
        return cls(a, b, c, d)


def triangular_invariants(L: TriangularOp):
    """Ratios unchanged by L → gLg: b²/(aa), c²/(aa), d²/(aa) and both triangle products."""
    a = L.a
    out = {"b": {}, "c": {}, "d": {}, "up": {}, "down": {}}
    for n, v in L.b.items():
        if n in a and add(n, T1) in a:
            out["b"][n] = v * v / (a[n] * a[add(n, T1)])
    for n, v in L.c.items():
        if n in a and add(n, T2) in a:
            out["c"][n] = v * v / (a[n] * a[add(n, T2)])
    for m, v in L.d.items():
        p, q = sub(m, T1), sub(m, T2)
        if p in a and q in a:
            out["d"][m] = v * v / (a[p] * a[q])
    for n in a:
        n1, n2, n12 = add(n, T1), add(n, T2), add(n, T12)
        if n in L.b and n in L.c and n12 in L.d and n1 in a and n2 in a:
            out["up"][n] = L.b[n] * L.c[n] * L.d[n12] / (a[n] * a[n1] * a[n2])
        if n1 in L.c and n2 in L.b and n12 in L.d and n12 in a and n1 in a and n2 in a:
            out["down"][n] = L.c[n1] * L.b[n2] * L.d[n12] / (a[n1] * a[n2] * a[n12])
    return out


def _sqrt(x, exact, site):
    if x < 0:
        raise TriangularFactorizationError(f"x² = {x} < 0 at site {site}: no real factorization", site)
    if isinstance(x, Fraction):
        rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if rn * rn == x.numerator and rd * rd == x.denominator:
            return Fraction(rn, rd)
        if exact:
            raise TriangularFactorizationError(f"x² = {x} is not a rational square at site {site}", site)
    return math.sqrt(x)


@dataclass
class TriangularFactorization:
    x: dict
    y: dict
    z: dict
    w: dict
    op: TriangularOp
    inverse: bool = False

    def factors(self):
        """(F, F⁺) as stencils: A, A⁺ for the forward form and B, B⁺ for the inverse form."""
        x, y, z = self.x, self.y, self.z
        X = StencilOp.from_table({(0, 0): x}, 2)
        if not self.inverse:
            F = X + StencilOp.from_table({T1: y, T2: z}, 2)
            Fp = X + StencilOp.from_table({(-1, 0): _shifted(y, T1), (0, -1): _shifted(z, T2)}, 2)
        else:
            F = X + StencilOp.from_table({(-1, 0): y, (0, -1): z}, 2)
            Fp = X + StencilOp.from_table({T1: _shifted(y, (-1, 0)), T2: _shifted(z, (0, -1))}, 2)
        return F, Fp

    def expansion(self):
        """F F⁺ + w by operator algebra."""
        F, Fp = self.factors()
        return F * Fp + StencilOp.from_table({(0, 0): self.w}, 2)


def _shifted(m, s):
    """n ↦ m[n − s]."""
    return {add(n, s): v for n, v in m.items()}


def _x_from(num1, num2, den, site, seed, exact):
    if den != 0:
        return _sqrt(num1 * num2 / den, exact, site)
    if num1 * num2 != 0:
        raise TriangularFactorizationError(f"d = 0 but b·c ≠ 0 at site {site}", site)
    if seed is None or site not in seed:
        raise TriangularFactorizationError(f"x is free at site {site}; a seed value is required", site)
    return seed[site]


def factorize_triangular(L: TriangularOp, seed=None, exact=True) -> TriangularFactorization:
    """L = (x + yT₁ + zT₂)(x + y_{n−T₁}T₁⁻¹ + z_{n−T₂}T₂⁻¹) + w.

    seed supplies x where b, c and d all vanish (x is otherwise determined).
    """
    x = {}
    for m in L.a:
        p, q = sub(m, T1), sub(m, T2)
        if m in L.d and p in L.b and q in L.c:
            x[m] = _x_from(L.b[p], L.c[q], L.d[m], m, seed, exact)
        elif seed is not None and m in seed and not (m in L.d and L.d[m] != 0):
            x[m] = seed[m]
    y = {n: _nz_div(v, x, add(n, T1)) for n, v in L.b.items() if add(n, T1) in x}
    z = {n: _nz_div(v, x, add(n, T2)) for n, v in L.c.items() if add(n, T2) in x}
    w = {n: L.a[n] - x[n] ** 2 - y[n] ** 2 - z[n] ** 2 for n in L.a if n in x and n in y and n in z}
    return TriangularFactorization(x, y, z, w, L, inverse=False)


def factorize_triangular_inverse(L: TriangularOp, seed=None, exact=True) -> TriangularFactorization:
    """L = (x' + y'T₁⁻¹ + z'T₂⁻¹)(x' + y'_{n+T₁}T₁ + z'_{n+T₂}T₂) + w'."""
    x = {}
    for k in L.a:
        m = add(k, T12)
        if k in L.b and k in L.c and m in L.d:
            x[k] = _x_from(L.b[k], L.c[k], L.d[m], k, seed, exact)
        elif seed is not None and k in seed and not (m in L.d and L.d[m] != 0):
            x[k] = seed[k]
    y = {n: _nz_div(L.b[sub(n, T1)], x, sub(n, T1)) for n in L.a if sub(n, T1) in L.b and sub(n, T1) in x}
    z = {n: _nz_div(L.c[sub(n, T2)], x, sub(n, T2)) for n in L.a if sub(n, T2) in L.c and sub(n, T2) in x}
    w = {n: L.a[n] - x[n] ** 2 - y[n] ** 2 - z[n] ** 2 for n in L.a if n in x and n in y and n in z}
    return TriangularFactorization(x, y, z, w, L, inverse=True)


def _nz_div(v, x, site):
    if x[site] == 0:
        raise TriangularFactorizationError(f"x = 0 at site {site}", site)
    return v / x[site]


def _require_nonzero(w, site):
    if w[site] == 0:
        raise DegenerateOperatorError(f"w = 0 at site {site}", site=site)
    return w[site]


def laplace_step_triangular(F: TriangularFactorization, psi=None):
    """(L̃, ψ̃) with L̃ = F⁺ w⁻¹ F + 1 and ψ̃ = F⁺ ψ."""
    x, y, z, w = F.x, F.y, F.z, F.w
    a, b, c, d = {}, {}, {}, {}
    if not F.inverse:
        for n in w:
            wn = _require_nonzero(w, n)
            b[n] = x[n] * y[n] / wn
            c[n] = x[n] * z[n] / wn
            d[add(n, T12)] = y[n] * z[n] / wn
            p, q = sub(n, T1), sub(n, T2)
            if p in w and q in w:
                a[n] = x[n] ** 2 / wn + y[p] ** 2 / _require_nonzero(w, p) + z[q] ** 2 / _require_nonzero(w, q) + 1
    else:
        for n in w:
            wn = _require_nonzero(w, n)
            d[n] = y[n] * z[n] / wn
            p, q = sub(n, T1), sub(n, T2)
            if p in x:
                b[p] = y[n] * x[n] / wn
            if q in x:
                c[q] = z[n] * x[n] / wn
            n1, n2 = add(n, T1), add(n, T2)
            if n1 in w and n2 in w:
                a[n] = x[n] ** 2 / wn + y[n1] ** 2 / _require_nonzero(w, n1) + z[n2] ** 2 / _require_nonzero(w, n2) + 1
    Lt = TriangularOp(a, b, c, d)
    if psi is None:
        return Lt, None
    _, Fp = F.factors()
    psit = {}
    for n in x:
        try:
            psit[n] = Fp.apply(psi, n)
        except KeyError:
            pass
    return Lt, psit


def laplace_step_triangular_stencil(F: TriangularFactorization):
    """F⁺ w⁻¹ F + 1 by operator algebra."""
    A, Ap = F.factors()
    winv = StencilOp.from_table({(0, 0): {n: 1 / v for n, v in F.w.items() if v != 0}}, 2)
    return Ap * winv * A + 1


def triangular_solve(L: TriangularOp, boundary: dict, N1: int, N2: int, origin=(0, 0)):
    """Solve Lψ = 0 on a rectangle.

    boundary holds ψ on rows j0, j0 + 1 and on columns i0, i0 + N1 − 1; the
    equation at (i, j) is solved for ψ_{i, j+1} sweeping rows upward and
    columns left to right.
    """
    i0, j0 = origin
    tab = L.coefficient_table()
    psi = dict(boundary)
    for j in range(1, N2 - 1):
        for i in range(1, N1 - 1):
            n = (i0 + i, j0 + j)
            rest = sum(tab[s][n] * psi[add(n, s)] for s in NEIGHBORS if s != (0, 1))
            psi[add(n, T2)] = -_div(rest, tab[(0, 1)][n], n, "c")
    return psi
