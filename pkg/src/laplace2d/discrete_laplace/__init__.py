"""Exact Laplace transformations of lattice operators (hyperbolic and triangular)."""

from .hyperbolic import (
    DegenerateOperatorError,
    FactorizedHyp,
    HyperbolicOp,
    InvariantPair,
    InverseFactorizedHyp,
    cyclic_m2_invariants,
    cyclic_m2_step,
    factorize_hyperbolic,
    factorize_hyperbolic_inverse,
    fixed_point_m2,
    hyperbolic_solve,
    invariant_step,
    invariants_of,
    inverse_laplace_step_hyperbolic,
    laplace_step_hyperbolic,
    laplace_step_stencil,
    rect,
    toda_relation_residual,
)
from .serialize import operator_from_json, operator_to_json, site_map_from_json, site_map_to_json
from .triangular import (
    TriangularFactorization,
    TriangularFactorizationError,
    TriangularOp,
    factorize_triangular,
    factorize_triangular_inverse,
    laplace_step_triangular,
    laplace_step_triangular_stencil,
    triangular_invariants,
    triangular_solve,
)
