"""Two-sided invariant-metric estimates near convex boundary points in C^n.

The package pairs certified lower bounds (Levi forms of explicit admissible
plurisubharmonic candidates) with certified upper bounds (explicit analytic
discs) around base points P - delta * nu, and fits the resulting scaling
laws F ~ delta^{-1/m} (tangential) and F ~ 1/delta (normal) across
log-spaced delta grids.
"""

from .checks import (
    BNWSample,
    CandidateReport,
    LeviProbe,
    bnw_constant,
    disc_hessian_bound_check,
    levi_form,
    psh_metric_unit_disc,
    random_admissible_bnw,
    subharmonic_check,
    unitary_invariance_check,
    verify_candidate,
)
from .corpus import (
    load_json_domain,
    make_ball,
    make_cxellipsoid,
    north_anchor,
    parse_domain,
    random_unitary,
    rotated_domain,
    shifted_domain,
    transformed_domain,
)
from .discs import (
    DiscFamily,
    affine_disc,
    affine_disc_bound,
    ball_metric_oracle,
    poincare,
    recentered_disc,
    recentered_disc_bound,
)
from .domains import (
    BoundaryFrame,
    ComplexDirection,
    ConvexDomain,
    DefiningFunction,
    PolynomialDefiningFunction,
    TransformedDefiningFunction,
    align_frame,
    base_point,
    complex_tangent_project,
    finite_difference_wirtinger,
    normalize_frame,
    outward_normal,
)
from .errors import (
    CenterOutside,
    ConfigInvalid,
    CxMetricError,
    DegenerateFit,
    FrameMisaligned,
    GradientVanishes,
    NegativeLevi,
    NormalizationUnstable,
    NotAdmissible,
    NotOnBoundary,
    OutsideDisc,
    OutsideDomain,
    PreconditionFailed,
    RayUnbounded,
    TypeExceedsCap,
    ZeroProjection,
)
from .lines import (
    ContactPoint,
    LineTypeEstimate,
    RadialProbe,
    boundary_radius,
    fit_loglog,
    gradient_ratio,
    line_type,
    max_radius,
    radius_scaling_exponent,
)
from .sibony import (
    LinearFunctional,
    ScalarCandidate,
    TangentialCandidateParams,
    choose_truncation_n,
    export_candidate,
    linear_functional,
    mixed_lower_bound,
    normal_candidate,
    sibony_lower_bound,
    tangential_candidate,
    truncation_order,
)
from .sweep import (
    BoundRecord,
    ScalingReport,
    SweepConfig,
    compute_record,
    fit_exponent,
    report_to_csv,
    report_to_json,
    sandwich_constants,
    sweep,
)

__version__ = "0.1.0"
