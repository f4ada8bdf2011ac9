"""Exponential dichotomies for nonautonomous linear difference systems.

The package computes, verifies, and constructs exponential dichotomies for
systems x(n+1) = A(n) x(n) on Z, Z+, or Z-, with special support for block
upper-triangular coefficients: diagonal-to-triangular projection
construction, dimension-balance tests, admissibility (bounded-input
bounded-state) verdicts, duality transport, and an exact shift-operator
gallery on sequence space.
"""

from .errors import DichoseqError, SpecParseError
from .scalars import RationalComplex
from .operators import (
    AdjointOp,
    AdjointShift,
    BlockDiag,
    BlockUpperTri,
    Compose,
    CoordProjection,
    Dense,
    Identity,
    OperatorExpr,
    Scale,
    Shift,
    Sum,
    Vector,
    Zero,
    adjoint,
    apply,
    dense,
    op_from_json,
    op_to_json,
    operator_norm_bound,
    to_dense,
)
from .subspaces import (
    SubspaceBasis,
    intersection,
    max_principal_angle,
    orth,
    orthogonal_complement,
    principal_angles,
)
from .systems import (
    Z,
    ZMINUS,
    ZPLUS,
    BlockTriangularSystem,
    CoefficientSequence,
    Cocycle,
    LinearSystem,
    TimeDomain,
    assemble,
    cocycle_eval,
    diagonal_part,
    system_from_json,
    system_to_json,
)
from .dichotomy import (
    DEFAULT_GAP_TOL,
    DEFAULT_HORIZON,
    DEFAULT_TOLERANCES,
    DichotomyCertificate,
    GrowthClassification,
    ProjectionFamily,
    ViolationReport,
    autonomous_projection,
    bounded_subspace,
    fit_constants,
    fit_projection_family,
    oblique_projection,
    state_window,
    verify_dichotomy,
)
from .admissibility import (
    AdmissibilityVerdict,
    WindowSolution,
    gamma_norm_estimate,
    gamma_projection,
    interior_stable,
    perron_test,
    solve_bounded_window,
)
from .triangular import (
    DimensionReport,
    LOperator,
    bounded_solution_block_substitution,
    build_L_operator,
    dimension_balance_test,
    dimension_balance_test_zminus,
    invertible_subspace_tests,
    s2prime_membership,
    tconv1_test,
    triangular_projection_from_diagonal,
    upper_triangular_projection,
)
from .duality import (
    DualSystemPair,
    adjoint_time_reversal,
    inverse_adjoint,
    transport_projections,
)
from .gallery import (
    GalleryInstance,
    bounded_complete_orbit_obstruction,
    exact_green_solution,
    exact_perron,
    gallery_preimage,
    gallery_preimage_check,
    shift_counterexample,
    verify_unitary_growth,
)
from .corpus import (
    search_unbalanced_instance,
    seeded_random_system,
    seeded_rational_system,
    seeded_triangular_system,
    unbalanced_instance,
)
from .reports import AnalysisReport, analyze

__version__ = "0.1.0"
