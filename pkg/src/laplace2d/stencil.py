"""Exact linear difference operators on Z^d.

An operator is a finite sum  (Lψ)_n = Σ_s c_s(n) ψ_{n+s}  with coefficient
callables c_s.  Composition, sums and scalar multiples stay lazy; coefficients
are only evaluated on requested sites, so callables that index a finite window
(and raise KeyError outside it) define operators on that window.
"""

from collections import defaultdict


def _add(s, t):
    return tuple(a + b for a, b in zip(s, t))


def _as_site(n):
    return n if isinstance(n, tuple) else (n,)


class StencilOp:
    def __init__(self, coeffs: dict, dim: int):
        self.coeffs = {tuple(s): c for s, c in coeffs.items()}
        self.dim = dim

    # --- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, dim=1):
        return cls({(0,) * dim: lambda n: 1}, dim)

    @classmethod
    def shift(cls, s):
        """T^s: (T^s ψ)_n = ψ_{n+s}."""
        s = _as_site(s)
        return cls({s: lambda n: 1}, len(s))

    @classmethod
    def multiply(cls, fn, dim=1):
        """Multiplication by the function n -> fn(n)."""
        return cls({(0,) * dim: fn}, dim)

    @classmethod
    def from_table(cls, table: dict, dim: int):
        """Coefficients given as {shift: {site: value}}; missing sites raise KeyError."""
        return cls({s: (lambda n, t=t: t[n]) for s, t in table.items()}, dim)

    # --- algebra ----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, StencilOp):
            return other
        return StencilOp({(0,) * self.dim: lambda n, c=other: c}, self.dim)

    def __add__(self, other):
        other = self._lift(other)
        out = defaultdict(list)
        for s, c in self.coeffs.items():
            out[s].append((1, c))
        for s, c in other.coeffs.items():
            out[s].append((1, c))
        return StencilOp({s: _summer(terms) for s, terms in out.items()}, self.dim)

    __radd__ = __add__

    def __neg__(self):
        return StencilOp({s: (lambda n, c=c: -c(n)) for s, c in self.coeffs.items()}, self.dim)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        """Composition (self ∘ other) or scalar multiple."""
        if not isinstance(other, StencilOp):
            return StencilOp({s: (lambda n, c=c: other * c(n)) for s, c in self.coeffs.items()}, self.dim)
        out = defaultdict(list)
        for s, a in self.coeffs.items():
            for t, b in other.coeffs.items():
                out[_add(s, t)].append((s, a, b))
        return StencilOp({u: _composer(terms) for u, terms in out.items()}, self.dim)

    def __rmul__(self, scalar):
        return self * scalar

    # --- evaluation -------------------------------------------------------
    def coeff(self, shift, n):
        c = self.coeffs.get(_as_site(shift))
        return 0 if c is None else c(_as_site(n))

    def table(self, sites):
        """{shift: {site: value}} on the given sites (nonzero values only)."""
        out = {}
        for s, c in self.coeffs.items():
            vals = {}
            for n in sites:
                v = c(_as_site(n))
                if v != 0:
                    vals[_as_site(n)] = v
            if vals:
                out[s] = vals
        return out

    def apply(self, psi, n):
        """(Lψ)_n for psi a mapping or callable on sites."""
        n = _as_site(n)
        get = psi.__getitem__ if hasattr(psi, "__getitem__") else psi
        return sum(c(n) * get(_add(n, s)) for s, c in self.coeffs.items())

    def equal_on(self, other, sites):
        """Exact equality of all coefficients on the given sites."""
        return not (self - other).table(sites)

    def shifts(self):
        return sorted(self.coeffs)


def _summer(terms):
    return lambda n: sum(c(n) for _, c in terms)


def _composer(terms):
    return lambda n: sum(a(n) * b(_add(n, s)) for s, a, b in terms)
