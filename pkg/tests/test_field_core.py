import numpy as np
import pytest

from laplace2d.field_core import (
    Cell,
    DivergenceError,
    FluxQuantizationError,
    ParityError,
    PeriodicScalarField,
    RectLattice,
    SectionField,
    SolvabilityError,
    commutator_phase,
    d,
    dbar,
    dumps_field,
    flux,
    gauge_transform,
    laplacian,
    loads_field,
    magnetic_translate,
    mean_field,
    operator_from_fields,
    poisson_solve_periodic,
    random_bandlimited,
    theta_series,
    trig_interpolate,
    weierstrass_sigma,
)


# --- flux ---------------------------------------------------------------


def test_flux_constant():
    cell = Cell(2 * np.pi, 1.0, 16, 16)
    assert flux(PeriodicScalarField.constant(cell, 1.0)) == pytest.approx(2 * np.pi, abs=1e-13)


def test_flux_zero_mean_harmonic():
    cell = Cell(1.7, 0.9, 32, 16)
    H = PeriodicScalarField.from_function(cell, lambda x, y: np.sin(2 * np.pi * x / cell.T1))
    assert abs(flux(H)) < 1e-14


def test_flux_matches_refined_grid():
    cell = Cell(1.3, 2.1, 64, 64)
    H = random_bandlimited(cell, np.random.default_rng(7), kmax=8, mean=0.4)
    Hf = random_bandlimited(cell.with_resolution(256), np.random.default_rng(7), kmax=8, mean=0.4)
    assert abs(flux(H) - flux(Hf)) < 1e-12


def test_trig_interpolate_reproduces_nodes_and_offgrid(rng):
    cell = Cell(1.3, 2.1, 16, 16)
    H = random_bandlimited(cell, rng, kmax=5, mean=0.4)
    X, Y = cell.mesh()
    assert np.abs(trig_interpolate(H, X, Y) - H.values).max() < 1e-12
    fine = cell.with_resolution(20)
    seed = int(rng.integers(1000))
    H1 = random_bandlimited(cell, np.random.default_rng(seed), kmax=5)
    H2 = random_bandlimited(fine, np.random.default_rng(seed), kmax=5)
    assert np.abs(trig_interpolate(H1, *fine.mesh()) - H2.values).max() < 1e-12


def test_flux_rejects_complex():
    cell = Cell(1, 1, 8, 8)
    with pytest.raises(ParityError):
        flux(PeriodicScalarField.constant(cell, 1j))


@pytest.mark.property
def test_flux_linear(rng):
    cell = Cell(1.0, 1.5, 32, 32)
    H1, H2 = random_bandlimited(cell, rng), random_bandlimited(cell, rng)
    a, b = rng.normal(size=2)
    assert abs(flux(a * H1 + b * H2) - a * flux(H1) - b * flux(H2)) < 1e-12


@pytest.mark.property
def test_flux_of_laplacian_vanishes(rng):
    cell = Cell(1.0, 1.5, 32, 32)
    phi = PeriodicScalarField(cell, rng.normal(size=(32, 32)))
    assert abs(flux(laplacian(phi))) < 1e-9


# --- Poisson ------------------------------------------------------------


def test_poisson_zero():
    cell = Cell(1, 1, 16, 16)
    assert poisson_solve_periodic(PeriodicScalarField.constant(cell, 0.0)).max_abs() == 0


def test_poisson_single_mode():
    cell = Cell(2 * np.pi, 2 * np.pi, 32, 32)
    rhs = PeriodicScalarField.from_function(cell, lambda x, y: np.cos(x))
    X, _ = cell.mesh()
    assert np.abs(poisson_solve_periodic(rhs).values + np.cos(X)).max() < 1e-13


def test_poisson_round_trip(rng):
    cell = Cell(1.2, 0.8, 64, 48)
    rhs = random_bandlimited(cell, rng, kmax=6)
    rhs = rhs - rhs.mean()
    phi = poisson_solve_periodic(rhs)
    assert (laplacian(phi) - rhs).max_abs() <= 1e-9 * rhs.max_abs()
    assert abs(phi.mean()) < 1e-12


def test_poisson_solvability_error():
    cell = Cell(1, 1, 16, 16)
    with pytest.raises(SolvabilityError, match="mean"):
        poisson_solve_periodic(PeriodicScalarField.constant(cell, 0.3))


def test_d_dbar_is_laplacian(rng):
    cell = Cell(1.1, 0.7, 32, 32)
    f = random_bandlimited(cell, rng, kmax=5)
    assert np.abs(d(dbar(f)).values - laplacian(f).values).max() < 1e-9


# --- gauge --------------------------------------------------------------


def _random_operator(rng, cell):
    H = random_bandlimited(cell, rng, kmax=3, amplitude=0.3, mean=2 * np.pi / cell.area)
    V = random_bandlimited(cell, rng, kmax=3, amplitude=0.3, mean=3.0)
    return operator_from_fields(H, V), H


def test_canonical_operator_reproduces_field(rng):
    cell = Cell(1.0, 1.0, 32, 32)
    L, H = _random_operator(rng, cell)
    assert (L.H - H).max_abs() < 1e-10
    b_def, lor = L.real_gauge_defect()
    assert b_def < 1e-12 and lor < 1e-10


def test_gauge_identity_and_constant():
    cell = Cell(1.0, 1.0, 16, 16)
    L, _ = _random_operator(np.random.default_rng(5), cell)
    for c in (0.0, 2.5):
        L2 = gauge_transform(L, PeriodicScalarField.constant(cell, c))
        assert np.abs(L2.A_per.values - L.A_per.values).max() < 1e-12
        assert np.abs(L2.B_per.values - L.B_per.values).max() < 1e-12


@pytest.mark.property
def test_gauge_preserves_H_and_U(rng):
    cell = Cell(1.0, 1.3, 32, 32)
    L, _ = _random_operator(rng, cell)
    f = random_bandlimited(cell, rng, kmax=4) + 1j * random_bandlimited(cell, rng, kmax=4)
    L2 = gauge_transform(L, f)
    assert (L2.H - L.H).max_abs() < 1e-10
    assert (L2.U - L.U).max_abs() < 1e-10


# --- magnetic translations ---------------------------------------------


def _random_section(rng, cell, m, ncell=3):
    vals = rng.normal(size=(ncell * cell.N1, ncell * cell.N2)) + 1j * rng.normal(
        size=(ncell * cell.N1, ncell * cell.N2)
    )
    return SectionField(cell, m, vals)


def test_zero_field_translation_is_shift():
    cell = Cell(1, 1, 8, 8)
    s = _random_section(np.random.default_rng(0), cell, 0)
    t = magnetic_translate(s, 1)
    assert np.array_equal(t.values, s.values[8:, :])


@pytest.mark.parametrize("m", [1, 3])
def test_translations_commute_integer_flux(m):
    cell = Cell(1.0, 1.4, 8, 8)
    s = _random_section(np.random.default_rng(m), cell, m)
    t12 = magnetic_translate(magnetic_translate(s, 2), 1)
    t21 = magnetic_translate(magnetic_translate(s, 1), 2)
    assert np.exp(1j * commutator_phase(cell, mean_field(cell, m))) == pytest.approx(1.0)
    assert np.abs(t12.values - t21.values).max() < 1e-10


@pytest.mark.property
def test_commutator_phase_equals_flux(rng):
    cell = Cell(1.0, 1.4, 8, 8)
    Hbar = rng.uniform(0.5, 3.0)
    s = _random_section(rng, cell, 0)
    t12 = magnetic_translate(magnetic_translate(s, 2, Hbar, strict=False), 1, Hbar, strict=False)
    t21 = magnetic_translate(magnetic_translate(s, 1, Hbar, strict=False), 2, Hbar, strict=False)
    ratio = t21.values / t12.values
    assert np.abs(ratio - np.exp(-1j * Hbar * cell.area)).max() < 1e-10


def test_fractional_flux_rejected():
    cell = Cell(1.0, 1.0, 8, 8)
    s = _random_section(np.random.default_rng(0), cell, 1)
    with pytest.raises(FluxQuantizationError):
        magnetic_translate(s, 1, Hbar=1.0)


# --- special functions ----------------------------------------------------


def test_sigma_zero_and_normalization():
    cell = Cell(1.0, 1.3, 8, 8)
    assert weierstrass_sigma(0.0, cell) == 0
    assert abs(weierstrass_sigma(1e-4, cell) / 1e-4 - 1) < 1e-7


@pytest.mark.property
def test_sigma_odd_and_quasiperiodic(rng):
    T1, T2 = rng.uniform(0.6, 2.0, size=2)
    lat = RectLattice(T1, T2)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert np.abs(lat.sigma(-z) + lat.sigma(z)).max() < 1e-12 * np.abs(lat.sigma(z)).max()
    r1 = lat.sigma(z + T1) / (-np.exp(2 * lat.eta1 * (z + T1 / 2)) * lat.sigma(z))
    r3 = lat.sigma(z + 1j * T2) / (-np.exp(2 * lat.eta3 * (z + 0.5j * T2)) * lat.sigma(z))
    assert np.abs(r1 - 1).max() < 1e-11 and np.abs(r3 - 1).max() < 1e-11


def test_sigma_zeros_on_lattice():
    lat = RectLattice(1.0, 1.3)
    pts = np.array([1.0, 1.3j, 2 + 2.6j, -1 - 1.3j])
    assert np.abs(lat.sigma(pts)).max() < 1e-12


def test_sigma_laurent_coefficient_matches_lattice_sum():
    lat = RectLattice(1.0, 1.3)
    # fifth Taylor coefficient of σ is −g2/240; extract it by a Cauchy integral
    K, r = 64, 0.2
    th = 2 * np.pi * np.arange(K) / K
    c5 = np.mean(lat.sigma(r * np.exp(1j * th)) * np.exp(-5j * th)) / r**5
    m = np.arange(-400, 401)
    M, N = np.meshgrid(m, m)
    w = (M + 1.3j * N)[(M != 0) | (N != 0)]
    g2_sum = 60 * np.sum(w**-4.0).real
    assert abs(-240 * c5.real - g2_sum) < 1e-4 * abs(g2_sum)
    assert abs(-240 * c5.real - lat.invariants[0]) < 1e-9 * abs(g2_sum)


def test_wp_differential_equation():
    lat = RectLattice(1.2, 0.9)
    g2, g3 = lat.invariants
    z = np.array([0.3 + 0.2j, -0.41 + 0.33j, 1.7 - 2.2j])
    lhs = lat.wp_prime(z) ** 2
    assert np.abs(lhs - (4 * lat.wp(z) ** 3 - g2 * lat.wp(z) - g3)).max() < 1e-11 * np.abs(lhs).max()


def test_theta_value():
    direct = 1 + 2 * sum(np.exp(-10 * n * n / 2) for n in range(1, 10))
    assert theta_series(0.0, 10.0) == pytest.approx(direct, abs=1e-13)
    assert theta_series(0.0, 10.0) == pytest.approx(1.0134758981, abs=1e-9)


@pytest.mark.property
def test_theta_symmetries(rng):
    u, a = rng.normal() * 3, rng.uniform(0.2, 5)
    assert theta_series(u, a) == pytest.approx(theta_series(-u, a), rel=1e-13)
    assert theta_series(u + a, a) == pytest.approx(np.exp(a / 2 + u) * theta_series(u, a), rel=1e-12)


def test_theta_divergence():
    with pytest.raises(DivergenceError):
        theta_series(0.0, 0.0)


# --- serialization --------------------------------------------------------


@pytest.mark.parametrize("binary", [False, True])
def test_serialization_round_trip(binary):
    cell = Cell(1.0, 2.0, 8, 16)
    f = random_bandlimited(cell, np.random.default_rng(1))
    g = loads_field(dumps_field(f, binary=binary))
    assert g.cell == cell and np.array_equal(g.values, f.values)
    c = f + 1j * f
    assert np.array_equal(loads_field(dumps_field(c, binary=binary)).values, c.values)
