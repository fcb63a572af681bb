"""Reproduction routines, one per acceptance criterion.

Each returns a JSON-ready dict with the measured quantities and a `passed` flag
computed at the criterion's tolerances.  Wall-clock time is reported separately
by the caller so that reports stay byte-identical across runs.
"""

import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..difference_oscillator import (
    charlier_poly,
    lattice_normalization,
    oscillator1_build,
    oscillator1_ground_state,
    oscillator1_qplus,
    oscillator2_eigenpairs,
    relation4_residual,
    tau_relation_residual,
    theta_ground_state,
)
from ..discrete_laplace import (
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
    hyperbolic_solve,
    invariant_step,
    invariants_of,
    inverse_laplace_step_hyperbolic,
    laplace_step_hyperbolic,
    laplace_step_triangular,
    rect,
    triangular_invariants,
    triangular_solve,
)
from ..field_core import Cell, RectLattice, flux, random_bandlimited
from ..laplace_continuum import chain_iterate, laplace_step, toda_substitute
from ..liouville import (
    AnalyticSample,
    grid,
    liouville_phi,
    liouville_phi_fn,
    liouville_residual,
    richardson_order,
    symmetry_patch,
)
from ..magnetic_spectra import BlochProblem, chern_number, landau_ladder_check, proposition3_check
from ..reduced_profiles import (
    CollapseError,
    L_levels,
    NewtonDivergenceError,
    build_reduced_operator,
    double_root_constant,
    profile_chain,
    quasicyclic_profile,
    semicyclic_with_zero_level,
    solve_quasicyclic_pde,
    threshold_period,
)

C2 = 2.0


def _flux_T2(p, m=1):
    """Second period giving flux 2πm for a y-independent profile."""
    return 2 * np.pi * m / (float(np.mean(p.fields(0)[0])) * p.period)


# --- 1-2: continuum identities --------------------------------------------------------------


def criterion_1(seed=0, count=50):
    rng = np.random.default_rng(seed)
    cell = Cell(1.3, 0.8, 64, 64)
    e1 = e2 = 0.0
    for _ in range(count):
        H = random_bandlimited(cell, rng, kmax=3, amplitude=0.4, mean=rng.uniform(0.5, 2.0))
        V = random_bandlimited(cell, rng, kmax=3, amplitude=0.4, mean=rng.uniform(0.5, 1.5)).exp()
        Ht, Vt = laplace_step(H, V)
        e1 = max(e1, abs(flux(Ht) - flux(H)))
        e2 = max(e2, abs(flux(Vt) - flux(V) - flux(Ht)))
    return {"instances": count, "flux_H_error": e1, "flux_V_error": e2, "passed": e1 <= 1e-10 and e2 <= 1e-9}


def criterion_2(seed=0, count=5):
    rng = np.random.default_rng(seed)
    cell = Cell(2 * np.pi, 2.4 * np.pi, 32, 32)
    link = toda = spread = 0.0
    for _ in range(count):
        H = random_bandlimited(cell, rng, kmax=2, amplitude=0.2, mean=3.0)
        f = random_bandlimited(cell, rng, kmax=2, amplitude=0.2, mean=1.0)
        ch = chain_iterate(f, H, 4)
        td = toda_substitute(ch)
        link = max(link, max(ch.link_residuals))
        toda = max(toda, td.max_residual)
        spread = max(spread, td.h_spread)
    return {
        "chains": count,
        "recursion_residual": link,
        "toda_residual": toda,
        "harmonic_spread": spread,
        "passed": link <= 1e-7 and toda <= 1e-7 and spread <= 1e-9,
    }


# --- 3-6, 12: magnetic spectra and reductions --------------------------------------------------


def criterion_3(N=64):
    base = landau_ladder_check(1.0, levels=3, N=N, m=1)
    multi = {}
    for m in (2, 3):
        r = landau_ladder_check(1.0, levels=0, N=N, m=m)
        multi[str(m)] = r["degeneracies"][0]
    ok = base["passed"] and max(base["relative_errors"]) <= 0.02 and all(int(k) == v for k, v in multi.items())
    return {
        "N": N,
        "eigenvalues": base["eigenvalues"],
        "relative_errors": base["relative_errors"],
        "degeneracies": base["degeneracies"],
        "zero_level_degeneracy_by_m": multi,
        "passed": bool(ok),
    }


def criterion_4(k_samples=32, depth=0.3):
    p = quasicyclic_profile(C2, double_root_constant("quasi_cyclic", C2) - depth, require_nonsingular=True)
    op = build_reduced_operator(p, 1.0, 2)
    ks = np.linspace(0, op.Hbar * op.T1, k_samples, endpoint=False)
    err_top = err_zero = 0.0
    for k in ks:
        top = L_levels(op, k, 3)
        err_top = max(err_top, abs(top[0] - C2) / C2)
        err_zero = max(err_zero, float(np.abs(top).min()) / C2)
    ch = profile_chain(p, _flux_T2(p), N2=8, n=2)
    closure = float((ch.f[2].exp() - ch.H[2] - C2).max_abs())
    return {
        "max_exp_f0": float(np.exp(p.g.max())),
        "k_samples": k_samples,
        "level_C2_rel_error": err_top,
        "level_0_rel_error": err_zero,
        "closure_residual": closure,
        "passed": err_top <= 5e-3 and err_zero <= 5e-3 and closure <= 1e-7,
    }


def criterion_5(N=32):
    p = semicyclic_with_zero_level(C2)
    reduced = float(np.abs(L_levels(build_reduced_operator(p, 1.0, 0), 0.0, 6) + C2).min() / C2)
    ch = profile_chain(p, _flux_T2(p), N2=N, n=2, N1=N)
    r = proposition3_check(ch)
    bloch = max(r["bloch_residuals"])
    return {
        "a": p.a,
        "reduced_rel_distance": reduced,
        "bloch_rel_distance": r["relative_distance"],
        "eigenspace_overlap": r["bloch_overlap"],
        "bloch_residual": bloch,
        "p_star": r["p_star"],
        "passed": bool(reduced <= 5e-3 and r["relative_distance"] <= 5e-3 and bloch <= 1e-6),
    }


def criterion_6(amplitudes=(0.1, 0.3, 0.5, 1.0, 1.5), N=64):
    Ts = threshold_period(C2)
    attempts = []
    found = False
    for amp in amplitudes:
        try:
            sol = solve_quasicyclic_pde(C2, 1.02 * Ts, amp, N=N)
            ex, ey = sol.fourier_energies()
            ok = sol.residual <= 1e-10 and min(ex, ey) >= 1e-4
            attempts.append({"amplitude": amp, "outcome": "nonconstant", "residual": sol.residual, "energies": [ex, ey]})
            found = found or ok
        except CollapseError as e:
            attempts.append({"amplitude": amp, "outcome": "collapse", "residual": e.solution.residual})
        except NewtonDivergenceError as e:
            attempts.append({"amplitude": amp, "outcome": "diverged", "message": str(e)})
    try:
        solve_quasicyclic_pde(C2, 0.5 * Ts, 0.3, N=N)
        collapse = False
    except CollapseError as e:
        collapse = e.solution.residual <= 1e-10
    return {"T_star": Ts, "attempts_at_1.02": attempts, "collapse_at_0.5": collapse, "passed": bool(found and collapse)}


def criterion_12(N=16):
    cell = Cell(math.sqrt(2 * math.pi), math.sqrt(2 * math.pi), N, N)
    bp = BlochProblem.landau(cell, 1)
    out = {}
    for Np in (8, 16):
        c, raw = chern_number(bp, 0, Np=Np)
        out[str(Np)] = {"c1": c, "raw": raw}
    ok = all(abs(v["c1"]) == 1 and abs(v["raw"] - v["c1"]) <= 1e-8 for v in out.values())
    ok = ok and out["8"]["c1"] == out["16"]["c1"]
    return {"N": N, "chern": out, "passed": bool(ok)}


# --- 7: Liouville ---------------------------------------------------------------------------------

_LAT = RectLattice(1.0, 1.3)
LIOUVILLE_SAMPLES = {
    "z": (lambda z: z, lambda z: np.ones_like(z), (0.5, 1.5, 0.5, 1.5)),
    "z2": (lambda z: z**2, lambda z: 2 * z, (0.5, 1.5, 0.5, 1.5)),
    "mobius": (lambda z: (2 * z + 1) / (z - 3), lambda z: -7 / (z - 3) ** 2, (0.5, 1.5, 0.5, 1.5)),
    "elliptic": (_LAT.wp, _LAT.wp_prime, (0.2, 0.3, 0.25, 0.35)),
}


def liouville_sample_report(name, h=1e-3):
    fn, dfn, box = LIOUVILLE_SAMPLES[name]
    x, y = grid(*box, h)
    res = liouville_residual(liouville_phi(AnalyticSample.from_function(fn, dfn, x, y)))
    phi = liouville_phi_fn(fn, dfn)
    cx, cy = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
    w = 0.25 * (box[1] - box[0])
    pts = np.array([cx + cy * 1j, cx - w + (cy + w) * 1j, cx + w + (cy - w) * 1j])
    orders, _ = richardson_order(phi, pts, h0=0.4 * w, levels=4)
    return {"residual": float(res), "order": float(orders[-1])}


def criterion_7(h=1e-3):
    samples = {name: liouville_sample_report(name, h) for name in LIOUVILLE_SAMPLES}
    base = liouville_phi_fn(lambda z: z, lambda z: np.ones_like(z))
    sym = {}
    for name in ("z2", "mobius"):
        fn, dfn, box = LIOUVILLE_SAMPLES[name]
        x, y = grid(*box, h)
        g = AnalyticSample.from_function(fn, dfn, x, y)
        sym[name] = float(liouville_residual(symmetry_patch(base, g)))
    ok = all(s["residual"] <= 1e-6 and abs(s["order"] - 4) <= 0.3 for s in samples.values())
    ok = ok and max(sym.values()) <= 1e-6
    return {"samples": samples, "symmetry_residuals": sym, "passed": bool(ok)}


# --- 8-9: discrete identities --------------------------------------------------------------------


def _q(rng, hi=9, signed=True):
    s = -1 if signed and rng.random() < 0.5 else 1
    return Fraction(s * int(rng.integers(1, hi + 1)), int(rng.integers(1, hi + 1)))


def _staircase(rng, N1, N2):
    data = {(i, 0): _q(rng) for i in range(N1)}
    data.update({(0, j): _q(rng) for j in range(N2)})
    return data


def _same(d1, d2):
    keys = set(d1) & set(d2)
    return bool(keys) and all(d1[n] == d2[n] for n in keys)


def hyperbolic_identities(rng, N=6):
    """The five exact identities for one random rational operator; {name: bool}."""
    sites = rect(N, N)
    L = HyperbolicOp(*({n: _q(rng, 97) for n in sites} for _ in range(3)))
    F = factorize_hyperbolic(L)
    one, E = F.expand()
    expansion = set(one.values()) == {1} and all(_same(getattr(E, k), getattr(L, k)) for k in "abc")
    g = {n: _q(rng) for n in sites}
    i0, ig = invariants_of(L), invariants_of(L.gauge(g))
    gauge = _same(i0.w, ig.w) and _same(i0.expH, ig.expH)
    psi = hyperbolic_solve(L, _staircase(rng, N, N), N, N)
    Lt, psit = laplace_step_hyperbolic(F, psi)
    res = Lt.apply(psit)
    transport = set(L.apply(psi).values()) == {0} and bool(res) and set(res.values()) == {0}
    Ltt, _ = inverse_laplace_step_hyperbolic(factorize_hyperbolic_inverse(Lt), psit)
    i2 = invariants_of(Ltt)
    round_trip = _same(i0.w, i2.w) and _same(i0.expH, i2.expH)
    lhs, rhs = invariants_of(Lt), invariant_step(i0)
    diagram = _same(lhs.w, rhs.w) and _same(lhs.expH, rhs.expH)
    return {"expansion": expansion, "gauge": gauge, "transport": transport, "round_trip": round_trip, "diagram": diagram}


def triangular_identities(rng, N=8):
    sites = rect(N, N)
    x, y, z = ({n: _q(rng) for n in sites} for _ in range(3))
    w = {n: _q(rng) ** 2 for n in sites}
    L = TriangularOp.from_stencil(TriangularFactorization(x, y, z, w, None).expansion(), sites)
    F = factorize_triangular(L)
    expansion = F.expansion().equal_on(L.stencil(), L.complete_sites())
    g = {n: _q(rng) for n in sites}
    i0, ig = triangular_invariants(L), triangular_invariants(L.gauge(g))
    gauge = all(_same(i0[k], ig[k]) for k in i0)
    bd = {}
    M = N - 2
    for i in range(1, M + 1):
        for j in (1, 2):
            bd[(i, j)] = _q(rng)
    for j in range(1, M + 1):
        bd[(1, j)] = _q(rng)
        bd[(M, j)] = _q(rng)
    psi = triangular_solve(L, bd, M, M, origin=(1, 1))
    Lt, psit = laplace_step_triangular(F, psi)
    rt = Lt.apply(psit)
    transport = set(L.apply(psi).values()) == {0} and bool(rt) and set(rt.values()) == {0}
    Ltt, _ = laplace_step_triangular(factorize_triangular_inverse(Lt))
    i2 = triangular_invariants(Ltt)
    round_trip = all(_same(i0[k], i2[k]) for k in i0)
    return {"expansion": bool(expansion), "gauge": gauge, "transport": transport, "round_trip": round_trip}


def criterion_8(seed=0, count=100):
    rng = np.random.default_rng(seed)
    tallies = {}
    skipped = 0
    for kind, fn in (("hyperbolic", hyperbolic_identities), ("triangular", triangular_identities)):
        done = 0
        while done < count:
            try:
                r = fn(rng)
            except (DegenerateOperatorError, TriangularFactorizationError):
                # a random rational hit an exact zero denominator; draw again
                skipped += 1
                continue
            for k, v in r.items():
                key = f"{kind}.{k}"
                tallies[key] = tallies.get(key, 0) + int(not v)
            done += 1
    return {"instances_per_family": count, "failures": tallies, "degenerate_redraws": skipped, "passed": not any(tallies.values())}


def criterion_9(seed=0, count=20, N=7):
    rng = np.random.default_rng(seed)
    C = Fraction(2)
    failures = 0
    for _ in range(count):
        data = {n: Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for n in _staircase(rng, N, N)}
        w0 = cyclic_m2_step(data, C, N, N)
        inv0 = cyclic_m2_invariants(w0, C)
        inv1 = invariant_step(inv0)
        inv2 = invariant_step(inv1)
        ok = _same(inv1.w, {n: C / v for n, v in w0.items()}) and _same(inv2.w, w0) and _same(inv2.expH, inv0.expH)
        failures += int(not ok)
    try:
        cyclic_m2_step({(i, 0): Fraction(2) for i in range(3)} | {(0, j): Fraction(2) for j in range(3)}, 1, 3, 3)
        rejected = False
    except DegenerateOperatorError:
        rejected = True
    return {"staircases": count, "closure_failures": failures, "C1_rejected": rejected, "passed": failures == 0 and rejected}


# --- 10-11: difference oscillators --------------------------------------------------------------


def criterion_10(h=0.7, M=500):
    L = oscillator1_build(h, 0, M)
    ev = np.linalg.eigvalsh(L.matrix())[:10]
    spec = float(np.abs(ev - h * np.arange(10)).max())
    Mg = 120
    psi = oscillator1_ground_state(h, Mg)
    qres = float(np.abs(oscillator1_qplus(h, Mg) @ psi).max())
    hc = 1.0
    ks = np.arange(1, 80)
    w = oscillator1_ground_state(hc, 79) ** 2
    P = np.array([[charlier_poly(m, int(k), hc) for k in ks] for m in range(7)])
    G = (P * w) @ P.T
    orth = float(np.abs(G - np.diag(np.diag(G))).max())
    return {
        "spectrum_error": spec,
        "qplus_residual": qres,
        "charlier_offdiag": orth,
        "passed": spec <= 1e-8 and qres <= 1e-12 and orth <= 1e-10,
    }


def criterion_11(seed=0):
    rng = np.random.default_rng(seed)
    exact_fail = 0
    for _ in range(10):
        c = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) * (1 if rng.random() < 0.5 else -1)
        a = Fraction(int(rng.integers(2, 9)), int(rng.integers(1, 9)))
        if a == 1:
            a = Fraction(3, 2)
        psi = {(k,): Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 9))) for k in range(-10, 11)}
        r4 = relation4_residual(c, a, [(k,) for k in range(-8, 9)])
        exact_fail += int(r4 != 0 or tau_relation_residual(c, a, psi) != 0)
    worst_res = worst_lam = 0.0
    accepted = 0
    for c, a in ((1.0, 2.0), (0.6, 1.7), (-0.8, 2.5), (1.0, 0.5), (0.7, 0.6)):
        for n, lam, _, res in oscillator2_eigenpairs(c, a, nmax=5, M=400):
            ref = 1 - a ** (-2 * n) if a > 1 else 1 - a ** (2 * n)
            worst_res = max(worst_res, res)
            worst_lam = max(worst_lam, abs(lam - ref))
            accepted += 1
    gamma, m = 1.5, 0
    shift = 0.0
    for x in rng.uniform(-3, 3, 20):
        lhs = theta_ground_state(gamma, m, x)
        shift = max(shift, abs(lhs - gamma ** (x - m) * theta_ground_state(gamma, m, x + 1)) / abs(lhs))
    norm = max(abs(lattice_normalization(2.0, 0, d) - 1) for d in np.linspace(0, 1, 10, endpoint=False))
    return {
        "exact_failures": exact_fail,
        "eigenpair_residual": float(worst_res),
        "eigenvalue_error": float(worst_lam),
        "accepted_eigenvectors": accepted,
        "theta_shift_residual": float(shift),
        "theta_normalization_error": float(norm),
        "passed": bool(exact_fail == 0 and worst_res <= 1e-10 and worst_lam <= 1e-10 and shift <= 1e-12 and norm <= 1e-10),
    }


# --- 13: property suite ------------------------------------------------------------------------


def tests_dir():
    return Path(__file__).resolve().parents[3] / "tests"


def run_property_suite(target=None, extra=()):
    """pytest -m property over the module tests (three seeds come from the rng fixture)."""
    d = tests_dir()
    if not d.is_dir():
        raise FileNotFoundError(f"test directory not found at {d}")
    paths = [str(d / target)] if target else [str(p) for p in sorted(d.glob("test_*.py")) if p.name != "test_acceptance.py"]
    cmd = [sys.executable, "-m", "pytest", "-q", "-m", "property", "-p", "no:cacheprovider", *extra, *paths]
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=d.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else ""
    return {"returncode": proc.returncode, "summary": tail, "passed": proc.returncode == 0}


def criterion_13():
    return run_property_suite()


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
    13: criterion_13,
}
