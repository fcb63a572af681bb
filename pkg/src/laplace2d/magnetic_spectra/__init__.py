"""Magnetic-Bloch spectra: discretization, DN80 ground states, exact levels, Chern numbers."""

from .bloch import (
    BandStructure,
    BlochProblem,
    GenericityError,
    SectorError,
    assemble_bloch_matrix,
    band_structure,
    chern_number,
    cluster_levels,
    covariant_derivatives,
    kinetic_matrix,
    lowest_eigenpairs,
    resample_problem,
)
from .checks import (
    HypothesisError,
    chain_operators,
    default_zeros,
    inverse_transport,
    landau_ladder_check,
    proposition3_check,
    supercell_bloch_residual,
    theorem_level_check,
    transport,
    unfold,
)
from .dn80 import ASolveError, DN80State, ZeroCountError, dn80_ground_state
