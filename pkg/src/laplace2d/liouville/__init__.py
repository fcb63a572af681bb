"""Elliptic Liouville solutions built from analytic functions."""

from .solutions import (
    AnalyticSample,
    NotAnalyticError,
    Patch,
    PatchTooSmallError,
    SingularityError,
    grid,
    liouville_phi,
    liouville_phi_fn,
    liouville_residual,
    liouville_residual_field,
    liouville_symmetry,
    phi_from_values,
    pointwise_residual,
    richardson_order,
    sample_patch,
    symmetry_patch,
)
