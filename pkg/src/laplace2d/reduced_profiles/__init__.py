"""y-independent reductions, quadrature profiles, the doubly periodic quasi-cyclic PDE."""

from .pde import (
    CollapseError,
    NewtonDivergenceError,
    PDESolution,
    constant_base,
    linearized_mode_count,
    linearized_polynomial,
    mode_count_scan,
    pde_residual,
    singular_periods,
    singular_wavenumbers,
    solve_quasicyclic_pde,
    threshold_period,
)
from .profiles import (
    Profile1D,
    RegimeError,
    double_root_constant,
    ode_oracle,
    ode_period,
    quasicyclic_profile,
    semicyclic_profile,
)
from .reduced import (
    L_levels,
    ReducedOperator,
    WindowError,
    build_reduced_operator,
    lambda_k_matrix,
    lambda_k_spectrum,
    profile_chain,
    reduced_chain_fields,
    sector_residual,
    semicyclic_with_zero_level,
    transport_chain_1d,
)
