"""Continuum Laplace transformations, chains and the Toda lattice."""

from .chain import (
    ChainState,
    GaugeTagError,
    PositivityError,
    chain_iterate,
    classify_chain,
    inverse_laplace_step,
    is_constant,
    laplace_step,
    laplace_step_real_gauge,
    link_residual,
    transport_zero_mode,
)
from .toda import (
    ChainLengthError,
    TodaField,
    toda_linearized_residual,
    toda_raw_residual,
    toda_rhs,
    toda_substitute,
    zero_curvature_residual,
)
