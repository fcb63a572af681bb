"""Theta series and Weierstrass functions of a rectangular lattice."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp


class DivergenceError(ValueError):
    """Theta series with non-positive quadratic coefficient."""


def _theta_indices(u, a, tail=40.0):
    # terms exp(-a/2 (n - u/a)^2 + u^2/(2a)); keep those within `tail` e-folds of the peak
    center = u / a
    half = int(np.ceil(np.sqrt(2 * tail / a))) + 1
    lo = int(np.floor(center)) - half
    return np.arange(lo, lo + 2 * half + 2)


def log_theta_series(u, a):
    """log Θ[u|a] for Θ[u|a] = Σ_n exp(−a n²/2 + n u)."""
    if not a > 0:
        raise DivergenceError(f"theta series diverges for a = {a}")
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u_arr)
    for i, ui in enumerate(u_arr.ravel()):
        n = _theta_indices(ui, a)
        out.flat[i] = logsumexp(-0.5 * a * n * n + n * ui)
    return out.reshape(np.shape(u)) if np.ndim(u) else float(out[0])


def theta_series(u, a):
    """Θ[u|a] = Σ_{n∈Z} exp(−a n²/2 + n u), truncated with relative tail below e^{-40}."""
    return np.exp(log_theta_series(u, a))


def _theta1_derivs(v, q, K):
    """ϑ₁ and its first three v-derivatives, nome q, K+1 terms."""
    n = np.arange(K + 1)
    w = 2.0 * (-1.0) ** n * q ** ((n + 0.5) ** 2)
    k = 2 * n + 1
    arg = np.multiply.outer(v, k)
    s, c = np.sin(arg), np.cos(arg)
    t0 = (w * s).sum(axis=-1)
    t1 = (w * k * c).sum(axis=-1)
    t2 = -(w * k**2 * s).sum(axis=-1)
    t3 = -(w * k**3 * c).sum(axis=-1)
    return t0, t1, t2, t3


@dataclass(frozen=True)
class RectLattice:
    """Lattice generated by 2ω₁ = T1 and 2ω₃ = i T2."""

    T1: float
    T2: float

    @property
    def omega1(self):
        return 0.5 * self.T1

    @property
    def omega3(self):
        return 0.5j * self.T2

    @cached_property
    def q(self):
        return np.exp(-np.pi * self.T2 / self.T1)

    @cached_property
    def nterms(self):
        # enough terms for the fundamental cell, |Im v| ≤ π T2 / (2 T1)
        lq = -np.log(self.q)
        K = 6
        while lq * ((K + 0.5) ** 2 - (K + 0.5)) < 45:
            K += 1
        return K + 2

    def _theta(self, v):
        return _theta1_derivs(np.asarray(v, dtype=complex), self.q, self.nterms)

    @cached_property
    def theta1_prime0(self):
        return self._theta(np.array(0.0))[1].real

    @cached_property
    def eta1(self):
        _, t1, _, t3 = self._theta(np.array(0.0))
        return float(-(np.pi**2) / (6 * self.T1) * (t3 / t1).real)

    @cached_property
    def eta3(self):
        # Legendre relation η₁ω₃ − η₃ω₁ = iπ/2
        return (self.eta1 * self.omega3 - 0.5j * np.pi) / self.omega1

    def _reduce(self, z):
        z = np.asarray(z, dtype=complex)
        m = np.round(z.real / self.T1)
        n = np.round(z.imag / self.T2)
        z0 = z - m * self.T1 - 1j * n * self.T2
        return z0, m, n

    def _eta_w(self, m, n):
        return m * self.eta1 + n * self.eta3

    def log_sigma(self, z):
        """A branch of log σ(z); exp of it is σ."""
        z0, m, n = self._reduce(z)
        v = np.pi * z0 / self.T1
        t0 = self._theta(v)[0]
        with np.errstate(divide="ignore"):
            base = (
                np.log(self.T1 / np.pi)
                + self.eta1 * z0**2 / self.T1
                + np.log(t0.astype(complex))
                - np.log(self.theta1_prime0)
            )
        W = m * self.T1 + 1j * n * self.T2
        shift = 2 * self._eta_w(m, n) * (z0 + 0.5 * W) + 1j * np.pi * (m + n + m * n)
        return base + shift

    def sigma(self, z):
        return np.exp(self.log_sigma(z))

    def zeta(self, z):
        z0, m, n = self._reduce(z)
        v = np.pi * z0 / self.T1
        t0, t1, _, _ = self._theta(v)
        return 2 * self.eta1 * z0 / self.T1 + (np.pi / self.T1) * t1 / t0 + 2 * self._eta_w(m, n)

    def wp(self, z):
        z0, _, _ = self._reduce(z)
        v = np.pi * z0 / self.T1
        t0, t1, t2, _ = self._theta(v)
        r1 = t1 / t0
        return -2 * self.eta1 / self.T1 - (np.pi / self.T1) ** 2 * (t2 / t0 - r1**2)

    def wp_prime(self, z):
        z0, _, _ = self._reduce(z)
        v = np.pi * z0 / self.T1
        t0, t1, t2, t3 = self._theta(v)
        r1 = t1 / t0
        return -((np.pi / self.T1) ** 3) * (t3 / t0 - 3 * (t2 / t0) * r1 + 2 * r1**3)

    @cached_property
    def invariants(self):
        """(g2, g3) from theta constants."""
        q = self.q
        n = np.arange(2 * self.nterms + 10)
        th2 = 2 * (q ** ((n + 0.5) ** 2)).sum()
        th3 = 1 + 2 * (q ** (n[1:] ** 2)).sum()
        th4 = 1 + 2 * ((-1.0) ** n[1:] * q ** (n[1:] ** 2)).sum()
        w = self.omega1
        g2 = np.pi**4 / (24 * w**4) * (th2**8 + th3**8 + th4**8)
        g3 = (
            np.pi**6
            / (432 * w**6)
            * (th2**4 + th3**4)
            * (th3**4 + th4**4)
            * (th4**4 - th2**4)
        )
        return float(g2), float(g3)


def weierstrass_sigma(z, cell):
    """σ(z) for the lattice generated by (T1, i T2) of `cell`."""
    return RectLattice(cell.T1, cell.T2).sigma(z)
