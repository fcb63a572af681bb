import numpy as np
import pytest
from scipy.integrate import solve_ivp

from laplace2d.field_core import (
    Cell,
    PeriodicScalarField,
    apply_operator,
    flux,
    laplacian,
    operator_from_fields,
    random_bandlimited,
    trig_interpolate,
)
from laplace2d.laplace_continuum import (
    ChainLengthError,
    GaugeTagError,
    PositivityError,
    chain_iterate,
    inverse_laplace_step,
    is_constant,
    laplace_step,
    laplace_step_real_gauge,
    toda_linearized_residual,
    toda_substitute,
    transport_zero_mode,
    zero_curvature_residual,
)


def _random_pair(rng, cell, amp=0.4):
    H = random_bandlimited(cell, rng, kmax=3, amplitude=amp, mean=rng.uniform(0.5, 2.0))
    f = random_bandlimited(cell, rng, kmax=3, amplitude=amp, mean=rng.uniform(0.5, 1.5))
    return H, f


# --- single step ------------------------------------------------------------


def test_landau_step():
    cell = Cell(1.0, 1.0, 16, 16)
    H0 = 2 * np.pi
    H = PeriodicScalarField.constant(cell, H0)
    Ht, Vt = laplace_step(H, H)
    assert np.allclose(Ht.values, H0, atol=1e-12)
    assert np.allclose(Vt.values, 2 * H0, atol=1e-12)


@pytest.mark.property
def test_step_flux_identities(rng):
    cell = Cell(1.3, 0.8, 64, 64)
    H, f = _random_pair(rng, cell)
    V = f.exp()
    Ht, Vt = laplace_step(H, V)
    assert abs(flux(Ht) - flux(H)) <= 1e-10
    assert abs(flux(Vt) - flux(V) - flux(Ht)) <= 1e-9


def test_positivity_error_reports_location():
    cell = Cell(1.0, 1.0, 16, 16)
    V = PeriodicScalarField.from_function(cell, lambda x, y: np.cos(2 * np.pi * x))
    with pytest.raises(PositivityError, match="not positive"):
        laplace_step(V * 0.0, V)


@pytest.mark.property
def test_inverse_round_trip(rng):
    cell = Cell(1.0, 1.2, 32, 32)
    H, f = _random_pair(rng, cell)
    V = f.exp()
    Ht, Vt = laplace_step(H, V)
    H2, V2 = inverse_laplace_step(Ht, Vt - Ht)
    assert (H2 - H).max_abs() < 1e-9 and (V2 - V).max_abs() < 1e-9


def test_inverse_landau_identity():
    cell = Cell(1.0, 1.0, 16, 16)
    H = PeriodicScalarField.constant(cell, 3.0)
    Ht, Vt = laplace_step(H, H)
    H2, V2 = inverse_laplace_step(Ht, Vt - Ht)
    assert (H2 - H).max_abs() < 1e-12 and (V2 - H).max_abs() < 1e-12


def test_inverse_primed_landau():
    # negative field: start from V = 0, U = −H0 > 0 and step backwards
    cell = Cell(1.0, 1.0, 16, 16)
    H0 = -2 * np.pi
    H = PeriodicScalarField.constant(cell, H0)
    V = PeriodicScalarField.constant(cell, 0.0)
    Hp, Vp = inverse_laplace_step(H, V - H)
    Up = Vp - Hp
    C1p = float((Up - (V - H)).mean())
    assert C1p == pytest.approx(-H0)
    assert (Hp - H).max_abs() < 1e-12


# --- real gauge -------------------------------------------------------------


def test_real_gauge_constant_potential():
    cell = Cell(1.0, 1.0, 16, 16)
    L = operator_from_fields(
        random_bandlimited(cell, np.random.default_rng(3), amplitude=0.2),
        PeriodicScalarField.constant(cell, 2.0),
    )
    Lt = laplace_step_real_gauge(L)
    assert (Lt.A_per - L.A_per).max_abs() < 1e-13 and (Lt.B_per - L.B_per).max_abs() < 1e-13


def test_real_gauge_requires_tag():
    cell = Cell(1.0, 1.0, 16, 16)
    L = operator_from_fields(PeriodicScalarField.constant(cell, 1.0), PeriodicScalarField.constant(cell, 1.0))
    from dataclasses import replace

    with pytest.raises(GaugeTagError):
        laplace_step_real_gauge(replace(L, gauge_tag="general"))


@pytest.mark.property
def test_real_gauge_step_matches_field_step(rng):
    cell = Cell(1.0, 1.4, 32, 32)
    H, f = _random_pair(rng, cell)
    L = operator_from_fields(H, f.exp())
    Lt = laplace_step_real_gauge(L)
    Ht, Vt = laplace_step(H, f.exp())
    assert (Lt.H - Ht).max_abs() < 1e-10
    assert (Lt.V - Vt).max_abs() < 1e-10
    b_def, lor = Lt.real_gauge_defect()
    assert b_def < 1e-9 and lor < 1e-9


def _operator_matrix(L):
    cell = L.cell
    n = cell.N1 * cell.N2
    M = np.empty((n, n), complex)
    for k in range(n):
        e = np.zeros(n, complex)
        e[k] = 1.0
        M[:, k] = apply_operator(L, PeriodicScalarField(cell, e.reshape(cell.N1, cell.N2), "complex")).values.ravel()
    return M


@pytest.mark.parametrize("seed", [0, 1])
def test_zero_mode_transport(seed):
    rng = np.random.default_rng(seed)
    cell = Cell(1.0, 1.0, 32, 32)
    H = random_bandlimited(cell, rng, kmax=2, amplitude=0.2)
    H = H - H.mean()
    V = random_bandlimited(cell, rng, kmax=2, amplitude=0.2, mean=0.0)
    L = operator_from_fields(H, V)
    M = -_operator_matrix(L)
    M = 0.5 * (M + M.conj().T)
    evals, evecs = np.linalg.eigh(M)
    # pick an eigenvalue that keeps the shifted potential positive
    k = int(np.argmax(evals > -V.values.min() + 1.0))
    eps = evals[k]
    from dataclasses import replace

    Ls = replace(L, V=V + eps)
    psi = PeriodicScalarField(cell, evecs[:, k].reshape(32, 32), "complex")
    r0 = apply_operator(Ls, psi).max_abs() / psi.max_abs()
    assert r0 < 1e-9
    Lt = laplace_step_real_gauge(Ls)
    pt = transport_zero_mode(Ls, psi)
    r1 = apply_operator(Lt, pt).max_abs() / pt.max_abs()
    assert r1 <= 10 * r0 + 1e-8


# --- chains -----------------------------------------------------------------


def test_landau_chain():
    cell = Cell(1.0, 1.0, 16, 16)
    H0 = 2 * np.pi
    f0 = PeriodicScalarField.constant(cell, np.log(H0))
    ch = chain_iterate(f0, PeriodicScalarField.constant(cell, H0), 3)
    for j, V in enumerate(ch.V):
        assert np.allclose(V.values, (j + 1) * H0, rtol=1e-12)
    ch1 = chain_iterate(f0, PeriodicScalarField.constant(cell, H0), 1)
    assert ch1.flags["semi_cyclic"] and ch1.constants[1] == pytest.approx(H0)
    assert ch1.flags["quasi_cyclic"]


def test_n1_nonconstant_is_not_semicyclic(rng):
    cell = Cell(2 * np.pi, 2 * np.pi, 32, 32)
    H, f = _random_pair(rng, cell)
    ch = chain_iterate(f, H + 2.0, 1)
    assert not ch.flags["semi_cyclic"]
    assert not is_constant(f)
    # H_1 = H_0 forces Δf_0 = 0
    assert (laplacian(f)).max_abs() > 1e-3


@pytest.mark.property
def test_chain_recursion_and_toda(rng):
    cell = Cell(2 * np.pi, 2.4 * np.pi, 32, 32)
    H = random_bandlimited(cell, rng, kmax=2, amplitude=0.2, mean=3.0)
    f = random_bandlimited(cell, rng, kmax=2, amplitude=0.2, mean=1.0)
    ch = chain_iterate(f, H, 4)
    assert max(ch.link_residuals) < 1e-8
    td = toda_substitute(ch)
    assert td.max_residual <= 1e-7
    assert td.h_spread <= 1e-9
    assert (td.h + ch.H[1]).max_abs() < 1e-8
    for j in range(1, len(ch)):
        assert (td.phis[j] - td.phis[j - 1] - ch.f[j]).max_abs() < 1e-10


def test_chain_positivity_breakdown_names_link():
    cell = Cell(1.0, 1.0, 16, 16)
    f0 = PeriodicScalarField.constant(cell, 0.0)
    H0 = PeriodicScalarField.constant(cell, -0.6)
    with pytest.raises(PositivityError) as exc:
        chain_iterate(f0, H0, 4)
    assert exc.value.link == 2


def test_chain_export_json():
    cell = Cell(1.0, 1.0, 16, 16)
    ch = chain_iterate(PeriodicScalarField.constant(cell, 0.0), PeriodicScalarField.constant(cell, 1.0), 2)
    import json

    rows = json.loads(ch.to_json())["links"]
    assert [r["j"] for r in rows] == [0, 1, 2]
    assert rows[2]["meanV"] == pytest.approx(3.0)


def test_toda_landau_exact_and_short_chain():
    cell = Cell(1.0, 1.0, 16, 16)
    f0 = PeriodicScalarField.constant(cell, np.log(2.0))
    ch = chain_iterate(f0, PeriodicScalarField.constant(cell, 2.0), 3)
    assert toda_substitute(ch).max_residual < 1e-13
    with pytest.raises(ChainLengthError):
        toda_substitute(chain_iterate(f0, PeriodicScalarField.constant(cell, 2.0), 1))


# --- zero curvature -----------------------------------------------------------


def _sinh_gordon(T_target_amp=0.8, N=128):
    """Periodic ψ'' = −8 sinh ψ solution, uniformly sampled (independent ODE oracle)."""
    rhs = lambda x, u: [u[1], -8 * np.sinh(u[0])]
    ev = lambda x, u: u[1]
    ev.direction = 1
    sol = solve_ivp(rhs, [0, 20], [T_target_amp, 0.0], method="DOP853", rtol=1e-13, atol=1e-14, events=ev)
    half = sol.t_events[0][0]
    T = 2 * half
    xs = np.arange(N) * T / N
    fine = solve_ivp(rhs, [0, T], [T_target_amp, 0.0], method="DOP853", rtol=1e-13, atol=1e-14, t_eval=xs)
    return T, fine.y[0]


@pytest.fixture(scope="module")
def toda2():
    T, psi = _sinh_gordon()
    cell = Cell(T, 1.0, 128, 8)
    P = PeriodicScalarField(cell, np.repeat(psi[:, None], 8, axis=1))
    return cell, [-0.5 * P, 0.5 * P]


def test_zero_curvature_flat():
    cell = Cell(1.0, 1.0, 8, 8)
    z = PeriodicScalarField.constant(cell, 0.0)
    assert zero_curvature_residual([z, z], 1.0) == 0.0


def test_zero_curvature_solution_and_sensitivity(toda2):
    cell, phis = toda2
    for lam in (1.0, 1j, -2.0):
        assert zero_curvature_residual(phis, lam) <= 1e-6
    base = zero_curvature_residual(phis, 1.0)
    bump = PeriodicScalarField.from_function(cell, lambda x, y: 1e-3 * np.cos(2 * np.pi * x / cell.T1))
    pert = zero_curvature_residual([phis[0], phis[1] + bump], 1.0)
    assert pert >= 1e2 * max(base, 1e-12)


def test_linearized_residual(toda2):
    cell, phis = toda2
    z = PeriodicScalarField.constant(cell, 0.0)
    assert toda_linearized_residual([z, z], phis) == 0.0
    eps = 1e-4
    X, Y = cell.mesh()
    xi = [
        PeriodicScalarField(cell, (trig_interpolate(p, X + eps, Y) - trig_interpolate(p, X - eps, Y)) / (2 * eps))
        for p in phis
    ]
    assert toda_linearized_residual(xi, phis) <= 1e-5
    rng = np.random.default_rng(0)
    noise = [random_bandlimited(cell, rng, kmax=2) for _ in phis]
    assert toda_linearized_residual(noise, phis) > 1e-1
    with pytest.raises(ChainLengthError):
        toda_linearized_residual([z], phis)
