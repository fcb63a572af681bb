"""Periodic fields, gauge machinery and special functions."""

from .fields import (
    Cell,
    ParityError,
    PeriodicScalarField,
    SolvabilityError,
    d,
    dbar,
    deriv_x,
    deriv_y,
    flux,
    laplacian,
    poisson_solve_periodic,
    random_bandlimited,
    trig_interpolate,
)
from .gauge import (
    FluxQuantizationError,
    OperatorCoefficients,
    SectionField,
    apply_operator,
    bloch_residual,
    canonical_phi,
    check_integer_flux,
    commutator_phase,
    gauge_transform,
    magnetic_translate,
    mean_field,
    operator_from_fields,
    potential_from_phi,
    translation_phase,
)
from .serialize import dumps_field, field_from_dict, field_to_dict, loads_field
from .special import (
    DivergenceError,
    RectLattice,
    log_theta_series,
    theta_series,
    weierstrass_sigma,
)
