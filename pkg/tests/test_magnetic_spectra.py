import numpy as np
import pytest

from laplace2d.field_core import Cell, PeriodicScalarField, bloch_residual, random_bandlimited
from laplace2d.laplace_continuum import chain_iterate
from laplace2d.magnetic_spectra import (
    ASolveError,
    BlochProblem,
    GenericityError,
    HypothesisError,
    SectorError,
    ZeroCountError,
    assemble_bloch_matrix,
    band_structure,
    chern_number,
    default_zeros,
    dn80_ground_state,
    landau_ladder_check,
    lowest_eigenpairs,
    proposition3_check,
    theorem_level_check,
    unfold,
)
from laplace2d.reduced_profiles import (
    double_root_constant,
    profile_chain,
    quasicyclic_profile,
    semicyclic_profile,
    semicyclic_with_zero_level,
)

C2 = 2.0
T = np.sqrt(2 * np.pi)


def landau_cell(N=24, m=1, aspect=1.0):
    area = 2 * np.pi * m
    T1 = np.sqrt(area * aspect)
    return Cell(T1, area / T1, N, N)


def random_problem(rng, N=24, m=1):
    cell = landau_cell(N, m)
    H = random_bandlimited(cell, rng, kmax=2, amplitude=0.3, mean=1.0)
    return H, BlochProblem.from_fields(H, H)


def flux_cell_chain(p, m=1, N=32):
    Hbar = np.mean(p.fields(0)[0])
    return profile_chain(p, 2 * np.pi * m / (Hbar * p.period), N2=N, n=2, N1=N)


# --- discretization ---------------------------------------------------------------------------


@pytest.mark.property
def test_bloch_matrix_is_hermitian(rng):
    _, bp = random_problem(rng)
    M = assemble_bloch_matrix(bp, tuple(rng.uniform(0, 1, 2)))
    assert abs(M - M.getH()).max() <= 1e-13


def test_free_spectrum_matches_difference_symbol():
    cell = Cell(T, 1.3 * T, 16, 16)
    zero = PeriodicScalarField.constant(cell, 0.0)
    bp = BlochProblem.from_fields(zero, zero)
    p = (0.31, 0.17)
    vals, _ = lowest_eigenpairs(assemble_bloch_matrix(bp, p), 8)

    def symbol(k, h):
        t = k * h
        return (30 - 32 * np.cos(t) + 2 * np.cos(2 * t)) / (12 * h * h)

    k1 = p[0] + 2 * np.pi * np.fft.fftfreq(16, d=1 / 16) / cell.T1
    k2 = p[1] + 2 * np.pi * np.fft.fftfreq(16, d=1 / 16) / cell.T2
    ref = np.sort((0.5 * (symbol(k1, cell.hx)[:, None] + symbol(k2, cell.hy)[None, :])).ravel())[:8]
    assert np.abs(vals - ref).max() <= 1e-10


@pytest.mark.property
def test_reciprocal_shift_invariance(rng):
    _, bp = random_problem(rng)
    p = tuple(rng.uniform(0, 1, 2))
    G = (2 * np.pi / bp.cell.T1, 2 * np.pi / bp.cell.T2)
    a = lowest_eigenpairs(assemble_bloch_matrix(bp, p), 4)[0]
    b = lowest_eigenpairs(assemble_bloch_matrix(bp, (p[0] + G[0], p[1] - G[1])), 4)[0]
    assert np.abs(a - b).max() <= 1e-8


def test_non_integer_flux_rejected():
    cell = Cell(T, T, 16, 16)
    H = PeriodicScalarField.constant(cell, 0.7)
    with pytest.raises(SectorError):
        BlochProblem.from_fields(H, H)


@pytest.mark.parametrize("H0, m", [(1.0, 1), (0.5, 1), (1.0, 2), (-1.0, 1)])
def test_landau_ladder(H0, m):
    r = landau_ladder_check(H0, levels=3, N=32, m=m)
    assert max(r["relative_errors"]) <= 0.02
    assert r["degeneracies"] == [m] * 4
    assert min(r["ladder_overlaps"]) >= 0.999
    assert r["passed"]


def test_landau_bands_are_flat():
    bs = band_structure(BlochProblem.landau(landau_cell(16), 1), 2, Np=3)
    assert all(bs.flat)
    assert max(bs.zone_widths) <= 1e-8


# --- DN80 ground states -----------------------------------------------------------------------


@pytest.mark.property
def test_dn80_state_is_bloch_zero_mode(rng):
    H, bp = random_problem(rng, N=32)
    st = dn80_ground_state(H, default_zeros(H.cell, 1))
    pts = st.cell.T1 * rng.uniform(0.1, 0.9, 5) + 1j * st.cell.T2 * rng.uniform(0.1, 0.9, 5)
    assert st.first_order_residual(pts) <= 1e-8
    assert bloch_residual(st.section(2)) <= 1e-10
    v = st.cell_values()
    M = assemble_bloch_matrix(bp, st.p)
    assert np.linalg.norm(M @ v) / np.linalg.norm(v) <= 1e-4 * st.Hbar


def test_dn80_sector_is_m_dimensional():
    cell = landau_cell(24, 2)
    H = PeriodicScalarField.constant(cell, 1.0)
    s = 1.1 + 0.9j
    pairs = [(0.7 + 0.4j, s - (0.7 + 0.4j)), (0.3 + 1.2j, s - (0.3 + 1.2j)), (1.5 + 0.2j, s - (1.5 + 0.2j))]
    states = [dn80_ground_state(H, z) for z in pairs]
    for st in states[1:]:
        assert np.allclose(st.p, states[0].p, atol=1e-9)
    V = np.column_stack([st.cell_values() / np.linalg.norm(st.cell_values()) for st in states])
    sv = np.linalg.svd(V, compute_uv=False)
    assert sv[1] > 1e-3 and sv[2] <= 1e-8
    M = assemble_bloch_matrix(BlochProblem.from_fields(H, H), states[0].p)
    vals = lowest_eigenpairs(M, 3)[0]
    assert np.abs(vals[:2]).max() <= 1e-4 and vals[2] >= 0.9


def test_dn80_zero_count_and_sign():
    cell = landau_cell(16, 2)
    H = PeriodicScalarField.constant(cell, 1.0)
    with pytest.raises(ZeroCountError):
        dn80_ground_state(H, [0.5 + 0.5j])
    with pytest.raises(ZeroCountError):
        dn80_ground_state(-H, [0.5 + 0.5j])
    assert issubclass(ASolveError, RuntimeError)


def test_unfold_reproduces_dn80_section(rng):
    H, _ = random_problem(rng, N=24)
    st = dn80_ground_state(H, default_zeros(H.cell, 1))
    ext = unfold(st.cell_values(), H.cell, st.Hbar, st.p)
    ref = st.section(2).values
    assert np.abs(ext - ref).max() <= 1e-9 * np.abs(ref).max()


# --- exact levels -----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def quasi_chain():
    return flux_cell_chain(quasicyclic_profile(C2, double_root_constant("quasi_cyclic", C2) - 0.3), m=1, N=32)


def test_exact_levels(quasi_chain):
    r = theorem_level_check(quasi_chain, Np=3)
    assert r["closure_residual"] <= 1e-7
    assert r["degeneracy"] == {"0": 1, "C_n": 1}
    assert min(r["zero_level_overlap"], r["top_level_overlap"], r["round_trip_overlap"]) >= 0.999
    # the exact levels are the lowest band (−C_n) and the band at 0
    widths = r["zone_widths"]
    assert widths[0] <= 1e-3 * C2
    assert widths[1] >= 1e-2
    assert r["passed"]


def test_exact_levels_flux_two():
    ch = flux_cell_chain(quasicyclic_profile(C2, double_root_constant("quasi_cyclic", C2) - 0.3), m=2, N=32)
    r = theorem_level_check(ch)
    assert r["degeneracy"] == {"0": 2, "C_n": 2}
    assert r["passed"]


def test_exact_levels_require_quasi_cyclic():
    cell = landau_cell(16)
    f0 = random_bandlimited(cell, np.random.default_rng(3), kmax=1, amplitude=0.05)
    H0 = PeriodicScalarField.constant(cell, 1.0)
    ch = chain_iterate(f0, H0, 1)
    with pytest.raises(HypothesisError, match="quasi-cyclic"):
        theorem_level_check(ch)


def test_landau_chain_exact_levels():
    cell = landau_cell(24)
    H0 = PeriodicScalarField.constant(cell, 1.0)
    ch = chain_iterate(H0.log(), H0, 1)
    r = theorem_level_check(ch)
    assert r["C_n"] == pytest.approx(1.0, abs=1e-12)
    assert r["passed"]


@pytest.fixture(scope="module")
def semi_chain():
    return flux_cell_chain(semicyclic_with_zero_level(C2), m=1, N=32)


def test_minus_Cn_in_spectrum(semi_chain):
    r = proposition3_check(semi_chain)
    assert r["relative_distance"] <= 5e-3
    assert r["bloch_overlap"] >= 0.999
    assert max(r["bloch_residuals"]) <= 1e-6
    assert r["passed"]


def test_minus_Cn_requires_zero_level():
    a = 0.5
    p = semicyclic_profile(C2, a, double_root_constant("semi_cyclic", C2, a) - 0.5, 256)
    with pytest.raises(HypothesisError, match="spectrum"):
        proposition3_check(flux_cell_chain(p, N=24))


# --- Chern numbers ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def landau16():
    return BlochProblem.landau(landau_cell(16), 1)


@pytest.mark.parametrize("Np", [8, 16])
def test_landau_chern_number(landau16, Np):
    c, raw = chern_number(landau16, 0, Np=Np)
    assert abs(c) == 1
    assert abs(raw - c) <= 1e-8


def test_chern_rephase_invariant(landau16):
    c0 = chern_number(landau16, 0, Np=6)
    c1 = chern_number(landau16, 0, Np=6, rephase_rng=np.random.default_rng(5))
    assert c0[0] == c1[0]
    assert abs(c0[1] - c1[1]) <= 1e-10


def test_chern_zero_field_band_is_trivial():
    cell = Cell(T, T, 16, 16)
    zero = PeriodicScalarField.constant(cell, 0.0)
    V = PeriodicScalarField.from_function(cell, lambda x, y: 2.0 * (np.cos(2 * np.pi * x / T) + np.cos(2 * np.pi * y / T)))
    assert chern_number(BlochProblem.from_fields(zero, V), 0, Np=6)[0] == 0


def test_chern_rejects_touching_bands():
    cell = Cell(T, T, 16, 16)
    zero = PeriodicScalarField.constant(cell, 0.0)
    with pytest.raises(GenericityError):
        chern_number(BlochProblem.from_fields(zero, zero), 0, Np=4)
