"""y-independent solutions of the length-2 semi- and quasi-cyclic chains.

Quasi-cyclic (V₂ = H₂ + C₂, H₀ = V₀), g = f₀:
    ½ g″ = C₂ − 2 e^g,     (g′)² = −4 F(g),   F = 2 e^g − C₂ g + C.
Semi-cyclic (L₂ = L₀ + C₂), f₁ = a − f₀, g = f₀ − a/2:
    ½ g″ = −4 e^{a/2} sinh g − C₂,   (g′)² = −4 F(g),   F = 4 e^{a/2} cosh g + C₂ g + C.

In both cases g oscillates between the two roots g₋ < g₊ of F.  One period is
obtained by inverting x(g) = ∫ dg / (2√(−F)) with g = g₋ + 2r sin²(θ/2),
r = (g₊ − g₋)/2, which turns the quadrature into the integral of a smooth even
2π-periodic function of θ; its cosine series integrates exactly.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


class RegimeError(ValueError):
    """No oscillatory regime for the requested constants."""


@dataclass(frozen=True)
class _Potential:
    kind: str
    C2: float
    C: float
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("quasi_cyclic", "semi_cyclic"):
            raise ValueError(f"kind must be 'quasi_cyclic' or 'semi_cyclic', got {self.kind!r}")

    def F(self, g):
        if self.kind == "quasi_cyclic":
            return 2 * np.exp(g) - self.C2 * g + self.C
        return 4 * np.exp(self.a / 2) * np.cosh(g) + self.C2 * g + self.C

    def dF(self, g):
        if self.kind == "quasi_cyclic":
            return 2 * np.exp(g) - self.C2
        return 4 * np.exp(self.a / 2) * np.sinh(g) + self.C2

    def center(self):
        if self.kind == "quasi_cyclic":
            return float(np.log(self.C2 / 2))
        return float(-np.arcsinh(self.C2 * np.exp(-self.a / 2) / 4))

    def rhs(self, g):
        """g″ = −2 F′(g)."""
        return -2 * self.dF(g)


def double_root_constant(kind, C2, a=0.0):
    """The value of C at which F has a double root (constant solution)."""
    p = _Potential(kind, C2, 0.0, a)
    gc = p.center()
    return float(-p.F(gc))


@dataclass
class Profile1D:
    kind: str
    C2: float
    C: float
    a: float
    xs: np.ndarray
    g: np.ndarray
    period: float
    g_minus: float
    g_plus: float
    flags: dict = field(default_factory=dict)
    _coef: np.ndarray = None

    @property
    def potential(self):
        return _Potential(self.kind, self.C2, self.C, self.a)

    @property
    def degenerate(self):
        return self.flags.get("degenerate", False)

    @property
    def f0(self):
        return self.g if self.kind == "quasi_cyclic" else self.g + self.a / 2

    def at(self, x):
        """g(x) for arbitrary x by exact inversion of the quadrature."""
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            return np.full(x.shape, self.g_minus)
        T = self.period
        u = np.mod(x, T)
        u = np.where(u > T / 2, T - u, u)
        theta = _invert(self._coef, u)
        r = 0.5 * (self.g_plus - self.g_minus)
        return self.g_minus + 2 * r * np.sin(theta / 2) ** 2

    def energy_residual(self):
        """max |(g′)² + 4F(g)| with g′ from the spectral derivative of the samples."""
        if self.degenerate:
            return float(np.abs(self.potential.F(self.g)).max())
        n = len(self.g)
        k = 2j * np.pi * np.fft.fftfreq(n, d=self.period / n)
        if n % 2 == 0:
            k[n // 2] = 0
        gp = np.fft.ifft(k * np.fft.fft(self.g)).real
        return float(np.abs(gp**2 + 4 * self.potential.F(self.g)).max())

    def closure_residual(self):
        return float(abs(self.at(0.0) - self.at(self.period)))

    def fields(self, level=0):
        """(H_level, V_level) on xs for the chain L₀ → L₁ → L₂."""
        C2, g = self.C2, self.g
        if self.kind == "quasi_cyclic":
            e = np.exp(g)
            table = {0: (e, e), 1: (C2 - e, np.full_like(g, C2)), 2: (C2 - e, 2 * C2 - e)}
        else:
            s = np.exp(self.a / 2)
            H0 = C2 + 2 * s * np.sinh(g)
            V0 = s * np.exp(g)
            table = {0: (H0, V0), 1: (-2 * s * np.sinh(g), s * np.exp(-g)), 2: (H0, V0 + C2)}
        if level not in table:
            raise ValueError("levels 0, 1, 2 are available")
        return table[level]

    def to_csv_rows(self, level=0):
        H, V = self.fields(level)
        return np.column_stack([self.xs, self.g, H, V])

    def metadata(self):
        return {
            "kind": self.kind,
            "C2": self.C2,
            "C": self.C,
            "a": self.a,
            "T1": self.period,
            "g_range": [self.g_minus, self.g_plus],
            "flags": dict(self.flags),
        }


def _roots(p: _Potential):
    gc = p.center()
    Fc = p.F(gc)
    scale = max(1.0, abs(p.C), abs(p.C2))
    if abs(Fc) <= 1e-13 * scale:
        return gc, gc, True
    if Fc > 0:
        raise RegimeError(f"F has no negative region (min F = {Fc:.3e}); no oscillation for C = {p.C}")

    def bracket(direction):
        step = 1.0
        while p.F(gc + direction * step) < 0:
            step *= 2
            if step > 1e4:
                raise RegimeError("turning point not bracketed")
        return gc + direction * step

    gm = brentq(p.F, bracket(-1), gc, xtol=1e-15, rtol=1e-15, maxiter=500)
    gp = brentq(p.F, gc, bracket(+1), xtol=1e-15, rtol=1e-15, maxiter=500)
    return gm, gp, False


def _w_coefficients(p: _Potential, gm, gp):
    """Cosine coefficients of w(θ) = dx/dθ = r sinθ / (2√(−F(g(θ))))."""
    r = 0.5 * (gp - gm)
    n, prev = 64, np.inf
    while True:
        th = np.pi * (np.arange(n) + 0.5) / n
        g = gm + 2 * r * np.sin(th / 2) ** 2
        w = r * np.sin(th) / (2 * np.sqrt(np.maximum(-p.F(g), 0)))
        c = dct(w, type=2) / n
        c[0] /= 2
        tail = np.abs(c[-8:]).max() / abs(c[0])
        # stop at convergence or once the tail sits on the rounding floor of F near the roots
        if tail <= 1e-15 or tail > prev / 4 or n >= 1 << 14:
            return c
        n, prev = 2 * n, tail


def _x_of_theta(c, th):
    k = np.arange(1, len(c))
    return c[0] * th + np.sin(np.multiply.outer(th, k)) @ (c[1:] / k)


def _w_of_theta(c, th):
    k = np.arange(len(c))
    return np.cos(np.multiply.outer(th, k)) @ c


def _invert(c, x):
    """θ(x) on [0, π] for x ∈ [0, T/2]."""
    x = np.asarray(x, dtype=float)
    th = np.clip(x / c[0], 0, np.pi)
    for _ in range(50):
        dth = (_x_of_theta(c, th) - x) / _w_of_theta(c, th)
        th = np.clip(th - dth, 0, np.pi)
        if np.abs(dth).max() < 1e-15:
            break
    return th


def _profile(kind, C2, C, a, samples):
    if C2 <= 0:
        raise ValueError("C2 must be positive")
    p = _Potential(kind, float(C2), float(C), float(a))
    gm, gp, degenerate = _roots(p)
    if degenerate:
        xs = np.zeros(samples)
        prof = Profile1D(kind, p.C2, p.C, p.a, xs, np.full(samples, gm), float("nan"), gm, gp, {"degenerate": True})
        return prof
    c = _w_coefficients(p, gm, gp)
    T = 2 * np.pi * c[0]
    xs = T * np.arange(samples) / samples
    prof = Profile1D(kind, p.C2, p.C, p.a, xs, None, float(T), gm, gp, {"degenerate": False}, c)
    prof.g = prof.at(xs)
    return prof


def quasicyclic_profile(C2, C, samples=256, require_nonsingular=False) -> Profile1D:
    """One period of g = f₀ for the quasi-cyclic n = 2 reduction, starting at the minimum g₋."""
    prof = _profile("quasi_cyclic", C2, C, 0.0, samples)
    prof.flags["singular_L2"] = bool(np.exp(prof.g_plus) >= C2)
    if require_nonsingular and prof.flags["singular_L2"]:
        raise RegimeError(f"e^f0 reaches {np.exp(prof.g_plus):.4g} >= C2 = {C2}: L2 would be singular")
    return prof


def semicyclic_profile(C2, a, C, samples=256) -> Profile1D:
    """One period of g = f₀ − a/2 for the semi-cyclic n = 2 reduction."""
    return _profile("semi_cyclic", C2, C, a, samples)


def ode_oracle(prof: Profile1D, x):
    """g(x) by direct integration of g″ = −2F′(g) from (g₋, 0)."""
    p = prof.potential
    sol = solve_ivp(
        lambda t, y: [y[1], p.rhs(y[0])],
        (0, float(np.max(x))),
        [prof.g_minus, 0.0],
        method="DOP853",
        t_eval=np.asarray(x, dtype=float),
        rtol=1e-13,
        atol=1e-13,
    )
    return sol.y[0]


def ode_period(prof: Profile1D):
    """Period from the ODE: twice the first return of g′ to zero at the maximum."""
    p = prof.potential

    def event(t, y):
        return y[1]

    event.direction = -1
    sol = solve_ivp(
        lambda t, y: [y[1], p.rhs(y[0])],
        (0, 10 * prof.period),
        [prof.g_minus, 0.0],
        method="DOP853",
        events=event,
        rtol=1e-13,
        atol=1e-13,
    )
    return 2 * float(sol.t_events[0][0])
