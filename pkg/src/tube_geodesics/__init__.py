"""Complex geodesics of convex tube domains: boundary measures, certificates,
verification and two-point interpolation."""

from .circle import Arc, ArcSet, mobius, poincare_distance, strip_map_tau, wrap_angle
from .domain import (
    DiscBaseDomain,
    HalfPlaneProduct,
    StaircaseDomain,
    StripDomain,
    canonical_staircase,
    from_reinhardt,
    validate_staircase,
)
from .geodesic import (
    DiscBaseSpec,
    HalfPlaneAtomSpec,
    InadmissibleSpec,
    MeasureSpec,
    StaircaseISpec,
    StaircaseIISpec,
    StripSpec,
    canonical_staircase_spec,
    eval_phi_h,
    geodesic_map,
    precompose,
    project,
    squared_pole_spec,
)
from .hfun import QuadCertificate, positivity_arc
from .measure import CircleMeasure, herglotz_quadrature_oracle, herglotz_transform
from .solver import SolveOptions, SolveProblem, SolverError, align_by_automorphism, solve_two_point
from .verify import (
    VerificationReport,
    check_measure_condition,
    check_radial_conditions,
    distance_sandwich,
    left_inverse_residual,
    left_inverse_value,
    verify_map,
)

__version__ = "0.1.0"
