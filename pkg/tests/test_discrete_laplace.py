from fractions import Fraction

import numpy as np
import pytest

from laplace2d.discrete_laplace import (
    DegenerateOperatorError,
    HyperbolicOp,
    TriangularFactorization,
    TriangularFactorizationError,
    TriangularOp,
    cyclic_m2_invariants,
    cyclic_m2_step,
    factorize_hyperbolic,
    factorize_hyperbolic_inverse,
    factorize_triangular,
    factorize_triangular_inverse,
    fixed_point_m2,
    hyperbolic_solve,
    invariant_step,
    invariants_of,
    inverse_laplace_step_hyperbolic,
    laplace_step_hyperbolic,
    laplace_step_stencil,
    laplace_step_triangular,
    laplace_step_triangular_stencil,
    operator_from_json,
    operator_to_json,
    rect,
    toda_relation_residual,
    triangular_invariants,
    triangular_solve,
)


def q(rng, lo=1, hi=9, signed=True):
    s = -1 if signed and rng.random() < 0.5 else 1
    return Fraction(s * int(rng.integers(lo, hi + 1)), int(rng.integers(1, hi + 1)))


def random_hyp(rng, N=8):
    sites = rect(N, N)
    # a wide range keeps accidental w ∈ {0, −1} out of random instances
    return HyperbolicOp(*({n: q(rng, hi=97) for n in sites} for _ in range(3)))


def staircase(rng, N1, N2, origin=(0, 0)):
    i0, j0 = origin
    data = {(i0 + i, j0): q(rng) for i in range(N1)}
    data.update({(i0, j0 + j): q(rng) for j in range(N2)})
    return data


def common(d1, d2):
    keys = set(d1) & set(d2)
    assert keys, "no common sites"
    return keys


def assert_maps_equal(d1, d2):
    for n in common(d1, d2):
        assert d1[n] == d2[n], n


# --- hyperbolic factorization -------------------------------------------------------


def test_constant_factorization():
    L = HyperbolicOp.constant(1, 1, 1, rect(4, 4))
    F = factorize_hyperbolic(L)
    assert set(F.f.values()) == {1} and set(F.w.values()) == {0}
    assert set(F.u.values()) == {1} and set(F.v.values()) == {1}


@pytest.mark.property
def test_expansion_identity(rng):
    L = random_hyp(rng)
    F = factorize_hyperbolic(L)
    one, E = F.expand()
    assert set(one.values()) == {1}
    for name in "abc":
        assert_maps_equal(getattr(E, name), getattr(L, name))
    # independent expansion by operator algebra
    S, R = F.stencil(), L.stencil()
    sites = [n for n in E.sites]
    assert S.equal_on(R, sites)


@pytest.mark.property
def test_potential_matches_invariant(rng):
    L = random_hyp(rng)
    F = factorize_hyperbolic(L)
    inv = invariants_of(L)
    assert_maps_equal(F.w, inv.w)
    for n, w in F.w.items():
        m = (n[0] - 1, n[1])
        assert w + 1 == L.c[m] / (L.a[m] * L.b[n])


def test_zero_c_raises():
    L = HyperbolicOp.constant(1, 1, 1, rect(4, 4))
    L.c[(1, 1)] = Fraction(0)
    with pytest.raises(DegenerateOperatorError) as exc:
        factorize_hyperbolic(L)
    assert exc.value.site == (1, 1)


# --- Laplace steps --------------------------------------------------------------------


@pytest.mark.property
def test_solution_transport_hyperbolic(rng):
    N = 8
    L = random_hyp(rng, N)
    psi = hyperbolic_solve(L, staircase(rng, N, N), N, N)
    assert len(psi) == N * N
    assert set(L.apply(psi).values()) == {0}
    F = factorize_hyperbolic(L)
    Lt, psit = laplace_step_hyperbolic(F, psi)
    res = Lt.apply(psit)
    assert res and set(res.values()) == {0}


@pytest.mark.property
def test_closed_form_step_matches_operator_algebra(rng):
    L = random_hyp(rng, 6)
    F = factorize_hyperbolic(L)
    Lt, _ = laplace_step_hyperbolic(F)
    assert Lt.sites
    assert laplace_step_stencil(F).equal_on(Lt.stencil(), Lt.sites)


@pytest.mark.property
def test_inverse_undoes_forward(rng):
    N = 9
    L = random_hyp(rng, N)
    psi = hyperbolic_solve(L, staircase(rng, N, N), N, N)
    Lt, psit = laplace_step_hyperbolic(factorize_hyperbolic(L), psi)
    Ltt, psitt = inverse_laplace_step_hyperbolic(factorize_hyperbolic_inverse(Lt), psit)
    res = Ltt.apply(psitt)
    assert res and set(res.values()) == {0}
    i0, i2 = invariants_of(L), invariants_of(Ltt)
    assert_maps_equal(i0.w, i2.w)
    assert_maps_equal(i0.expH, i2.expH)
    # the transported solution is a multiple of the original one: ψ̃̃ = h ψ with h from the gauge
    ratios = {n: psitt[n] / psi[n] for n in psitt if psi.get(n)}
    assert len(ratios) > 10


def test_constant_step_matches_invariant_step():
    L = HyperbolicOp.constant(1, 1, 2, rect(6, 6))
    Lt, _ = laplace_step_hyperbolic(factorize_hyperbolic(L))
    lhs, rhs = invariants_of(Lt), invariant_step(invariants_of(L))
    assert_maps_equal(lhs.w, rhs.w)
    assert_maps_equal(lhs.expH, rhs.expH)


@pytest.mark.property
def test_commuting_diagram(rng):
    L = random_hyp(rng, 9)
    Lt, _ = laplace_step_hyperbolic(factorize_hyperbolic(L))
    lhs, rhs = invariants_of(Lt), invariant_step(invariants_of(L))
    assert_maps_equal(lhs.w, rhs.w)
    assert_maps_equal(lhs.expH, rhs.expH)


# --- invariants -------------------------------------------------------------------------------


def test_constant_coefficients_zero_field():
    inv = invariants_of(HyperbolicOp.constant(Fraction(3, 2), 5, 7, rect(4, 4)))
    assert set(inv.expH.values()) == {1}


@pytest.mark.property
def test_gauge_invariance(rng):
    L = random_hyp(rng)
    g = {n: q(rng) for n in rect(8, 8)}
    i0, i1 = invariants_of(L), invariants_of(L.gauge(g))
    assert_maps_equal(i0.w, i1.w)
    assert_maps_equal(i0.expH, i1.expH)


def test_invariant_step_fixed_point():
    sites = rect(5, 5)
    inv = invariant_step(invariants_of(HyperbolicOp.constant(1, 1, 3, sites)))
    w0 = invariants_of(HyperbolicOp.constant(1, 1, 3, sites)).w
    assert set(inv.w.values()) == set(w0.values()) == {2}
    assert set(inv.expH.values()) == {1}


@pytest.mark.property
def test_discrete_toda_relation(rng):
    inv0 = invariants_of(random_hyp(rng, 10))
    inv1 = invariant_step(inv0)
    inv2 = invariant_step(inv1)
    assert toda_relation_residual(inv0, inv1) == 0
    assert toda_relation_residual(inv1, inv2) == 0
    assert inv2.expH


# --- cyclic m = 2 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("C", [4, Fraction(9, 4)])
def test_m2_fixed_point(C):
    for ws in fixed_point_m2(C):
        assert ws * ws == C
        w = cyclic_m2_step(staircase_const(ws, 6, 6), C, 6, 6)
        assert set(w.values()) == {ws}


def staircase_const(v, N1, N2):
    return {**{(i, 0): Fraction(v) for i in range(N1)}, **{(0, j): Fraction(v) for j in range(N2)}}


@pytest.mark.property
def test_m2_closure(rng):
    C = Fraction(2)
    N = 7
    data = {n: Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for n in staircase(rng, N, N)}
    w0 = cyclic_m2_step(data, C, N, N)
    inv0 = cyclic_m2_invariants(w0, C)
    inv1 = invariant_step(inv0)
    assert_maps_equal(inv1.w, {n: C / v for n, v in w0.items()})
    inv2 = invariant_step(inv1)
    assert_maps_equal(inv2.w, w0)
    assert_maps_equal(inv2.expH, inv0.expH)


def test_m2_degenerate_C():
    with pytest.raises(DegenerateOperatorError):
        cyclic_m2_step(staircase_const(2, 3, 3), 1, 3, 3)


# --- solver ------------------------------------------------------------------------------------------


def test_solve_zero_boundary():
    L = HyperbolicOp.constant(2, 3, 5, rect(5, 5))
    psi = hyperbolic_solve(L, staircase_const(0, 5, 5), 5, 5)
    assert set(psi.values()) == {0}


def test_solve_geometric():
    a, b, c = 2, 3, 5
    lam = Fraction(1, 2)
    mu = -(1 + a * lam) / (b + c * lam)
    exact = {(i, j): lam**i * mu**j for i in range(6) for j in range(6)}
    L = HyperbolicOp.constant(a, b, c, rect(6, 6))
    bd = {n: v for n, v in exact.items() if n[0] == 0 or n[1] == 0}
    assert hyperbolic_solve(L, bd, 6, 6) == exact


def test_json_round_trip():
    rng = np.random.default_rng(5)
    L = random_hyp(rng, 4)
    L2 = operator_from_json(operator_to_json(L))
    assert (L2.a, L2.b, L2.c) == (L.a, L.b, L.c)
    assert '"' in operator_to_json(L) and "/" in operator_to_json(L)


# --- triangular lattice --------------------------------------------------------------------------------


def build_triangular(rng, N=8, signed=True):
    """L = AA⁺ + s² from random rational factors, read off on the sites where it is complete."""
    sites = rect(N, N)
    x = {n: q(rng, signed=signed) for n in sites}
    y = {n: q(rng, signed=signed) for n in sites}
    z = {n: q(rng, signed=signed) for n in sites}
    w = {n: q(rng) ** 2 for n in sites}
    F = TriangularFactorization(x, y, z, w, None)
    L = TriangularOp.from_stencil(F.expansion(), sites)
    return L, F


def test_triangular_diagonal():
    sites = rect(4, 4)
    a = {n: Fraction(k + 3) for k, n in enumerate(sites)}
    zero = {n: Fraction(0) for n in sites}
    seed = {n: Fraction(1, 2) for n in sites}
    L = TriangularOp(a, dict(zero), dict(zero), dict(zero))
    F = factorize_triangular(L, seed=seed)
    assert set(F.y.values()) == {0} and set(F.z.values()) == {0}
    for n, w in F.w.items():
        assert w == a[n] - seed[n] ** 2
    # degenerate step: ψ̃ = xψ and L̃ = a/w
    psi = {n: Fraction(k + 1) for k, n in enumerate(sites)}
    Lt, psit = laplace_step_triangular(F, psi)
    for n in psit:
        assert psit[n] == F.x[n] * psi[n]
    for n, v in Lt.a.items():
        assert v == a[n] / F.w[n]


def test_triangular_missing_seed():
    sites = rect(3, 3)
    zero = {n: Fraction(0) for n in sites}
    L = TriangularOp({n: Fraction(2) for n in sites}, dict(zero), dict(zero), dict(zero))
    with pytest.raises(TriangularFactorizationError):
        factorize_triangular(L)


@pytest.mark.property
def test_triangular_expansion_exact(rng):
    L, F0 = build_triangular(rng)
    F = factorize_triangular(L)
    sites = L.complete_sites()
    assert len(sites) >= 36
    assert F.expansion().equal_on(L.stencil(), sites)
    for n in F.x:
        assert F.x[n] ** 2 == F0.x[n] ** 2
    for n in F.w:
        assert F.w[n] == F0.w[n]


def test_triangular_negative_square():
    rng = np.random.default_rng(0)
    L, _ = build_triangular(rng, 5)
    m = next(iter(L.d))
    L.d[m] = -L.d[m]
    p, qq = (m[0] - 1, m[1]), (m[0], m[1] - 1)
    if p in L.b and qq in L.c:
        with pytest.raises(TriangularFactorizationError):
            factorize_triangular(L)


def test_triangular_d_zero_inconsistent():
    rng = np.random.default_rng(1)
    L, _ = build_triangular(rng, 5)
    L.d[(2, 2)] = Fraction(0)
    with pytest.raises(TriangularFactorizationError) as exc:
        factorize_triangular(L)
    assert exc.value.site == (2, 2)


@pytest.mark.property
def test_triangular_inverse_factorization(rng):
    # positive factors make b c / d > 0, so the real inverse factorization exists
    L, _ = build_triangular(rng, signed=False)
    G = factorize_triangular_inverse(L, exact=False)
    sites = L.complete_sites()
    E = G.expansion()
    worst = 0.0
    tab = L.coefficient_table()
    checked = 0
    for n in sites:
        for s in tab:
            try:
                e = E.coeff(s, n)
            except KeyError:
                continue
            worst = max(worst, abs(float(e) - float(tab[s][n])))
            checked += 1
    assert checked > 100 and worst < 1e-9


@pytest.mark.property
def test_triangular_transport(rng):
    N = 8
    Lw, _ = build_triangular(rng, N + 2)
    bd = {}
    for i in range(1, N + 1):
        for j in (1, 2):
            bd[(i, j)] = q(rng)
    for j in range(1, N + 1):
        bd[(1, j)] = q(rng)
        bd[(N, j)] = q(rng)
    psi = triangular_solve(Lw, bd, N, N, origin=(1, 1))
    res = Lw.apply(psi)
    assert len(res) >= (N - 2) ** 2 and set(res.values()) == {0}
    F = factorize_triangular(Lw)
    Lt, psit = laplace_step_triangular(F, psi)
    rt = Lt.apply(psit)
    assert rt and set(rt.values()) == {0}
    assert laplace_step_triangular_stencil(F).equal_on(Lt.stencil(), Lt.complete_sites())


@pytest.mark.property
def test_triangular_forward_inverse_gauge(rng):
    L, _ = build_triangular(rng, 10)
    Lt, _ = laplace_step_triangular(factorize_triangular(L))
    G = factorize_triangular_inverse(Lt)
    assert set(G.w.values()) == {1}
    Ltt, _ = laplace_step_triangular(G)
    i0, i2 = triangular_invariants(L), triangular_invariants(Ltt)
    for k in i0:
        assert_maps_equal(i0[k], i2[k])


@pytest.mark.property
def test_triangular_gauge_invariants(rng):
    L, _ = build_triangular(rng)
    g = {n: q(rng) for n in rect(8, 8)}
    i0, i1 = triangular_invariants(L), triangular_invariants(L.gauge(g))
    for k in i0:
        assert_maps_equal(i0[k], i1[k])


def test_triangular_json_round_trip():
    rng = np.random.default_rng(2)
    L, _ = build_triangular(rng, 4)
    L2 = operator_from_json(operator_to_json(L))
    assert (L2.a, L2.b, L2.c, L2.d) == (L.a, L.b, L.c, L.d)
