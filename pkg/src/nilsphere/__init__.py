"""Geometric integrators and integrability diagnostics for a coupled
nil-manifold / sphere Hamiltonian system.

The package models the cotangent dynamics of a three-dimensional nil-manifold
factor carrying a flat-at-zero family of first integrals, a two-sphere factor
with its angular momentum, and their horizontal product, together with the
reduced four-dimensional chart obtained from the momentum constraint.  It
provides structure-exploiting integrators (closed-form factor flows, a
splitting for the product, an implicit midpoint rule on the chart), a
finite-difference Poisson-bracket auditor that is independent of the analytic
vector fields, torus-fibration diagnostics, rotation-vector and Lyapunov
estimators, and a deterministic CLI that writes every report atomically.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    NewtonDivergence,
    NilsphereError,
    NotHorizontal,
    NotOnRegularFiber,
    PoleProximity,
    SingularProximity,
    StepRejected,
)
from .hamiltonians import (
    FiberProfile,
    builtin_profile,
    custom_u_profile,
    h1,
    h2,
    h_product,
    h_reduced,
    submersion_profile,
    u_sin_cubed_profile,
    u_sin_profile,
)
from .heisenberg import (
    NilCotangent,
    NilElement,
    deck_action,
    frame_momenta,
    lattice_generator,
    nil_exp,
    nil_inv,
    nil_log,
    nil_mul,
    reduce_mod_lattice,
)
from .integrators import (
    SCHEMES,
    IntegratorConfig,
    Trajectory,
    integrate,
    step_chart_midpoint,
    step_nil_euler,
    step_product_split,
    step_sphere_exact,
)
from .invariants import (
    TAGS,
    BracketReport,
    commutation_matrix,
    drift_report,
    evaluate,
    evaluate_series,
    independence_rank,
    nu_bound_check,
    poisson_bracket,
)
from .reduction import (
    ProductState,
    ReducedState,
    horizontality_defect,
    product_from_reduced,
    reduced_from_product,
)
from .sphere import SphereCotangent, SpherePolar, angular_momentum_about_axis

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "NewtonDivergence",
    "NilsphereError",
    "NotHorizontal",
    "NotOnRegularFiber",
    "PoleProximity",
    "SingularProximity",
    "StepRejected",
    "FiberProfile",
    "builtin_profile",
    "custom_u_profile",
    "h1",
    "h2",
    "h_product",
    "h_reduced",
    "submersion_profile",
    "u_sin_cubed_profile",
    "u_sin_profile",
    "NilCotangent",
    "NilElement",
    "deck_action",
    "frame_momenta",
    "lattice_generator",
    "nil_exp",
    "nil_inv",
    "nil_log",
    "nil_mul",
    "reduce_mod_lattice",
    "SCHEMES",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "step_chart_midpoint",
    "step_nil_euler",
    "step_product_split",
    "step_sphere_exact",
    "TAGS",
    "BracketReport",
    "commutation_matrix",
    "drift_report",
    "evaluate",
    "evaluate_series",
    "independence_rank",
    "nu_bound_check",
    "poisson_bracket",
    "ProductState",
    "ReducedState",
    "horizontality_defect",
    "product_from_reduced",
    "reduced_from_product",
    "SphereCotangent",
    "SpherePolar",
    "angular_momentum_about_axis",
]
