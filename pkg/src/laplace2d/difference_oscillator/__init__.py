"""1D difference operators, discrete Riccati factorizations and difference oscillators."""

from .jacobi import (
    FactorizationError,
    Factorization1D,
    Jacobi1DOp,
    cyclic_chain_1d,
    darboux_1d,
    factorize_1d,
    operator_distance,
    reconstruction_residual,
)
from .oscillators import (
    DegenerateLadderError,
    QuantizationError,
    WindowError,
    charlier_poly,
    lattice_normalization,
    oscillator1_build,
    oscillator1_ground_state,
    oscillator1_qplus,
    oscillator2_build,
    oscillator2_eigenpairs,
    oscillator2_ground_state,
    poisson_normalization,
    q_op,
    q_plus_op,
    relation4_residual,
    sign_changes,
    tau,
    tau_relation_residual,
    theta_ground_state,
    theta_ground_state_periodic_part,
    truncated_spectrum,
)
