"""Landau ladder, exact chain levels and spectrum-point propagation on Bloch discretizations.

Level convention: the exactly solvable levels 0 and +C_n are eigenvalues of L_n.
The self-adjoint discretization is of −L, where they appear as 0 and −C_n.
Zero modes are transported by ψ_{j+1} = e^{−f_j/2}(∂ + A_j)ψ_j in the real
gauge produced by laplace_step_real_gauge, which leaves the mean field and hence
the magnetic translations unchanged, so all levels share one Bloch sector p.
"""

import numpy as np
from scipy.optimize import brentq

from ..field_core import (
    Cell,
    PeriodicScalarField,
    SectionField,
    bloch_residual,
    operator_from_fields,
    translation_phase,
)
from ..laplace_continuum import laplace_step_real_gauge
from .bloch import (
    BlochProblem,
    assemble_bloch_matrix,
    band_structure,
    cluster_levels,
    covariant_derivatives,
    lowest_eigenpairs,
)
from .dn80 import dn80_ground_state


class HypothesisError(ValueError):
    """A hypothesis of the checked statement fails; the message names the clause."""


def _overlap_with_space(v, basis):
    """‖P v‖/‖v‖ for the orthonormal columns of basis."""
    return float(np.linalg.norm(basis.conj().T @ v) / np.linalg.norm(v))


def _rel_residual(M, v, level):
    return float(np.linalg.norm(M @ v - level * v) / np.linalg.norm(v))


def default_zeros(cell: Cell, m):
    """m distinct points inside the cell on a diagonal."""
    t = (np.arange(m) + 0.5) / m
    return [complex(cell.T1 * (0.5 * s + 0.25), cell.T2 * s) for s in t]


def landau_ladder_check(H0, levels=3, N=64, m=1, aspect=1.0, tol=0.02):
    """Lowest eigenvalues of −L₀ for constant field H₀ and the ladder built by (∂+A) or (∂̄+B).

    H₀ > 0 uses V = H₀ (zero modes of ∂̄+B, DN80 seed), λ_n = nH₀.
    H₀ < 0 uses V = 0 (zero modes of ∂+A), λ_n = −nH₀, ladder by ∂̄+B.
    """
    if H0 == 0:
        raise ValueError("H0 must be nonzero")
    area = 2 * np.pi * m / abs(H0)
    T1 = np.sqrt(area * aspect)
    cell = Cell(T1, area / T1, N, N)
    Hf = PeriodicScalarField.constant(cell, H0)
    V = PeriodicScalarField.constant(cell, H0 if H0 > 0 else 0.0)
    op = operator_from_fields(Hf, V)
    sign = 1 if H0 > 0 else -1
    bp = BlochProblem(op, sign * m)
    if H0 > 0:
        seed = dn80_ground_state(Hf, default_zeros(cell, m))
        p = seed.p
    else:
        seed, p = None, (0.0, 0.0)
    M = assemble_bloch_matrix(bp, p)
    count = m * (levels + 1)
    vals, vecs = lowest_eigenpairs(M, count + m)
    expected = np.arange(levels + 1) * abs(H0)
    clusters = cluster_levels(vals, 0.25 * abs(H0))[: levels + 1]
    found = np.array([c[0] for c in clusters])
    degeneracy = [c[1] for c in clusters]
    err = np.abs(found - expected) / abs(H0)
    Dx, Dy = covariant_derivatives(bp, p)
    raise_op = (Dx - 1j * Dy) if H0 > 0 else (Dx + 1j * Dy)
    psi = seed.cell_values() if seed is not None else vecs[:, 0]
    overlaps = []
    for n in range(levels + 1):
        block = vecs[:, n * m : (n + 1) * m]
        overlaps.append(_overlap_with_space(psi, block))
        psi = raise_op @ psi
    return {
        "H0": H0,
        "flux_quanta": sign * m,
        "p": [float(q) for q in p],
        "eigenvalues": found.tolist(),
        "expected": expected.tolist(),
        "relative_errors": err.tolist(),
        "degeneracies": degeneracy,
        "ladder_overlaps": overlaps,
        "passed": bool(err.max() <= tol and min(overlaps) >= 0.999 and all(d == m for d in degeneracy)),
    }


def chain_operators(chain):
    """Real-gauge coefficients of L_0..L_n, each from laplace_step_real_gauge of the previous."""
    ops = [operator_from_fields(chain.H[0], chain.f[0].exp())]
    for _ in range(len(chain) - 1):
        ops.append(laplace_step_real_gauge(ops[-1]))
    return ops


def _require(chain, kind):
    n = len(chain) - 1
    if not chain.flags.get(kind):
        raise HypothesisError(f"chain is not {kind.replace('_', '-')}")
    Cn = chain.constants.get(n)
    cell = chain.cell
    Hbar = float(chain.H[0].mean())
    m = Hbar * cell.area / (2 * np.pi)
    if abs(m - round(m)) > 1e-6 or round(m) <= 0:
        raise HypothesisError(f"flux must be a positive integer multiple of 2π, got {m:.6g}")
    for j, fj in enumerate(chain.f[:n]):
        if not np.all(np.isfinite(fj.values)):
            raise HypothesisError(f"potential V_{j} is singular")
    return n, Cn, int(round(m))


def transport(ops, bps, p, psi0):
    """[ψ₀, ψ₁, …, ψ_n] with ψ_{j+1} = e^{−f_j/2}(D_x − iD_y)_j ψ_j on cell samples."""
    out = [psi0]
    for op, bp in zip(ops[:-1], bps[:-1]):
        Dx, Dy = covariant_derivatives(bp, p)
        w = np.exp(-0.5 * op.V.log().values).ravel()
        out.append(w * ((Dx - 1j * Dy) @ out[-1]))
    return out


def inverse_transport(ops, bps, p, psin):
    """ψ_j = −(∂̄ + B_j)(e^{f_j/2}ψ_{j+1}) / (2V_j), back to level 0."""
    psi = psin
    for op, bp in zip(reversed(ops[:-1]), reversed(bps[:-1])):
        Dx, Dy = covariant_derivatives(bp, p)
        V = op.V.values.ravel()
        psi = -((Dx + 1j * Dy) @ (np.sqrt(V) * psi)) / (2 * V)
    return psi


def _level_block(vals, vecs, level, tol):
    sel = np.abs(vals - level) <= tol
    return int(sel.sum()), vecs[:, sel]


def theorem_level_check(chain, zeros=None, Np=None, flat_tol=1e-3, tol=5e-3):
    """Closure, the two exact levels of −L_n at 0 and −C_n, their multiplicities and eigenvectors.

    The 0-level eigenvectors are compared with the transported DN80 zero mode of L₀,
    the −C_n ones with the DN80 zero mode of ∂̄ + B_n; the inverse transport must
    return the seed.
    """
    n, Cn, m = _require(chain, "quasi_cyclic")
    ops = chain_operators(chain)
    bps = [BlochProblem(op, m) for op in ops]
    cell = chain.cell
    closure = float((chain.f[n].exp() - chain.H[n] - Cn).max_abs())
    zeros = default_zeros(cell, m) if zeros is None else zeros
    seed = dn80_ground_state(chain.H[0], zeros)
    p = seed.p
    psis = transport(ops, bps, p, seed.cell_values())
    Mn = assemble_bloch_matrix(bps[n], p)
    vals, vecs = lowest_eigenpairs(Mn, 2 * m + 2)
    deg_zero, zero_block = _level_block(vals, vecs, 0.0, tol * Cn)
    deg_top = _level_block(vals, vecs, -Cn, tol * Cn)[0]
    # the DN80 state of ∂̄ + B_n lives in its own sector
    top = dn80_ground_state(chain.H[n], zeros)
    top_vec = top.cell_values()
    Mn_top = assemble_bloch_matrix(bps[n], top.p)
    tv, tvec = lowest_eigenpairs(Mn_top, 2 * m + 2)
    top_block = _level_block(tv, tvec, -Cn, tol * Cn)[1]
    back = inverse_transport(ops, bps, p, psis[n])
    v0 = psis[0]
    round_trip = float(abs(np.vdot(v0, back)) / (np.linalg.norm(v0) * np.linalg.norm(back)))
    zero_overlap = _overlap_with_space(psis[n], zero_block) if deg_zero else 0.0
    top_overlap = _overlap_with_space(top_vec, top_block) if top_block.shape[1] else 0.0
    report = {
        "n": n,
        "C_n": Cn,
        "flux_quanta": m,
        "p": [float(q) for q in p],
        "lowest_eigenvalues": vals.tolist(),
        "closure_residual": closure,
        "zero_level_residual": _rel_residual(Mn, psis[n], 0.0) / Cn,
        "top_level_residual": _rel_residual(Mn_top, top_vec, -Cn) / Cn,
        "degeneracy": {"0": deg_zero, "C_n": deg_top},
        "zero_level_overlap": zero_overlap,
        "top_level_overlap": top_overlap,
        "round_trip_overlap": round_trip,
        "convention": "levels {0, +C_n} of L_n appear as {0, -C_n} in the spectrum of -L_n",
    }
    if Np:
        bs = band_structure(bps[n], 2 * m + 1, Np=Np, flat_tol=flat_tol)
        report["zone_widths"] = bs.zone_widths
        report["flat"] = bs.flat
    report["passed"] = bool(
        closure <= 1e-7
        and deg_top == m
        and deg_zero == m
        and min(zero_overlap, top_overlap, round_trip) >= 0.999
    )
    return report


def _band_zero_crossing(bp, Np, count):
    """A quasi-momentum where some band of −L₀ crosses 0, by bisection along p₁ or p₂."""
    p1, p2 = bp.pgrid(Np)
    E = np.empty((Np, Np, count))
    for a in range(Np):
        for b in range(Np):
            E[a, b] = lowest_eigenpairs(assemble_bloch_matrix(bp, (p1[a], p2[b])), count)[0]
    G1, G2 = p1[1] - p1[0], p2[1] - p2[0]
    for j in range(count):
        for a in range(Np):
            for b in range(Np):
                for (da, db) in ((1, 0), (0, 1)):
                    e0 = E[a, b, j]
                    e1 = E[(a + da) % Np, (b + db) % Np, j]
                    if e0 == 0:
                        return (p1[a], p2[b]), j
                    if e0 * e1 < 0:
                        def band(t):
                            q = (p1[a] + t * da * G1, p2[b] + t * db * G2)
                            return lowest_eigenpairs(assemble_bloch_matrix(bp, q), count)[0][j]

                        t = brentq(band, 0.0, 1.0, xtol=1e-13)
                        return (p1[a] + t * da * G1, p2[b] + t * db * G2), j
    return None, None


def _tile(f: PeriodicScalarField, r=2):
    c = f.cell
    return PeriodicScalarField(Cell(r * c.T1, r * c.T2, r * c.N1, r * c.N2), np.tile(f.values, (r, r)))


def unfold(values, cell: Cell, Hbar, p, cells=2):
    """Extend unit-cell samples of a Bloch section with quasi-momentum p to cells×cells periods."""
    N1, N2 = cell.N1, cell.N2
    out = np.empty((cells * N1, cells * N2), dtype=complex)
    out[:N1, :N2] = np.asarray(values).reshape(N1, N2)
    for a in range(cells):
        for b in range(cells):
            if a == b == 0:
                continue
            if a > 0:
                src, k, T, off = out[(a - 1) * N1 : a * N1, b * N2 : (b + 1) * N2], 1, cell.T1, ((a - 1) * N1, b * N2)
            else:
                src, k, T, off = out[:N1, (b - 1) * N2 : b * N2], 2, cell.T2, (0, (b - 1) * N2)
            x = (off[0] + np.arange(N1)) * cell.hx
            y = (off[1] + np.arange(N2)) * cell.hy
            X, Y = np.meshgrid(x, y, indexing="ij")
            ph = np.exp(1j * (p[k - 1] * T - translation_phase(k, Hbar, cell, X, Y)))
            dest = (slice(a * N1, (a + 1) * N1), slice(b * N2, (b + 1) * N2))
            out[dest] = ph * src
    return out


def supercell_bloch_residual(chain, p, psi0, cells=2):
    """Transport ψ₀ on a cells×cells supercell (which only imposes that larger period) and
    return the unit-cell magnetic-Bloch residual of every ψ_j."""
    sup_ops = [operator_from_fields(_tile(chain.H[0], cells), _tile(chain.f[0].exp(), cells))]
    for _ in range(len(chain) - 1):
        sup_ops.append(laplace_step_real_gauge(sup_ops[-1]))
    m = int(round(sup_ops[0].Hbar * sup_ops[0].cell.area / (2 * np.pi)))
    bps = [BlochProblem(op, m) for op in sup_ops]
    Hbar = sup_ops[0].Hbar
    start = unfold(psi0, chain.cell, Hbar, p, cells).ravel()
    big = sup_ops[0].cell
    out = []
    for psi in transport(sup_ops, bps, p, start):
        s = SectionField(chain.cell, int(round(Hbar * chain.cell.area / (2 * np.pi))), psi.reshape(big.N1, big.N2), tuple(p))
        out.append(bloch_residual(s))
    return out


def proposition3_check(chain, N=None, Np=4, count=4, tol=5e-3):
    """−C_n ∈ spec(L₀) given 0 ∈ spec(L₀), and transport of the 0-state to the −C_n eigenspace."""
    n, Cn, m = _require(chain, "semi_cyclic")
    ops = chain_operators(chain)
    bps = [BlochProblem(op, m) for op in ops]
    p, j = _band_zero_crossing(bps[0], Np, count)
    if p is None:
        raise HypothesisError("0 is not in the spectrum of L_0 on the sampled quasi-momenta")
    M0 = assemble_bloch_matrix(bps[0], p)
    vals, vecs = lowest_eigenpairs(M0, count + 2 * m)
    dist = float(np.abs(vals - Cn).min())
    k0 = int(np.argmin(np.abs(vals)))
    psis = transport(ops, bps, p, vecs[:, k0])
    psin = psis[n]
    target = np.abs(vals - Cn) <= tol * abs(Cn)
    overlap = _overlap_with_space(psin, vecs[:, target]) if target.any() else 0.0
    # −L_n = −L₀ − C_n, so ψ_n must satisfy −L₀ψ_n = C_n ψ_n
    res = _rel_residual(M0, psin, Cn) / abs(Cn)
    # the sector residual of the image under L_n, using its own Bloch matrix
    Mn = assemble_bloch_matrix(bps[n], p)
    res_n = _rel_residual(Mn, psin, 0.0) / abs(Cn)
    report = {
        "n": n,
        "C_n": Cn,
        "flux_quanta": m,
        "p_star": [float(q) for q in p],
        "band": j,
        "distance_to_minus_Cn": dist,
        "relative_distance": dist / abs(Cn),
        "transported_residual": res,
        "transported_residual_Ln": res_n,
        "bloch_overlap": overlap,
        "convention": "-C_n in spec(L_0) appears as +C_n in spec(-L_0)",
    }
    report["bloch_residuals"] = supercell_bloch_residual(chain, p, vecs[:, k0])
    report["passed"] = bool(dist <= tol * abs(Cn) and overlap >= 0.999 and max(report["bloch_residuals"]) <= 1e-6)
    return report
