"""Stability of homogeneous one-phase free boundary solutions on Lawson cones.

Public surface re-exported from the submodules:

  weights    eigenvalue weights and their derivative calculus
  boundary   boundary functionals, exponent windows, exact identities
  cones      cross-section profiles, curvatures, interior inequality
  stability  Robin eigenvalue, verdicts, certificates, positive solutions
  harmonic   exact harmonic polynomial generation
  simons     randomized differential-inequality test suite
  report     scan tables and CSV/JSON serialization
"""

from ._kernels import HAVE_NATIVE, IMPLEMENTATION
from .boundary import (
    BoundaryFunctionalResult,
    CaseIdentityCheck,
    LStarResult,
    SubsolutionWindow,
    alpha_lower_bound,
    boundary_B,
    boundary_L,
    case_identity_check,
    criterion37,
    lstar_optimize,
    subsolution_window,
)
from .cones import (
    BoundaryData,
    ConeSolution,
    InteriorMargin,
    boundary_data,
    hessian_field,
    interior_inequality_check,
    solve_cross_section,
    weight_boundary_ratio,
)
from .errors import (
    AllPointsGuarded,
    ConestabError,
    DegenerateBoundary,
    IdentityViolated,
    MarginTooSmall,
    NoConvergence,
    NonSmoothPoint,
    NoZeroFound,
    OutOfDomain,
    StableCone,
    UnstableCone,
    UsageError,
)
from .harmonic import (
    HarmonicPoly,
    harmonic_dimension,
    poly_from_coeffs,
    random_harmonic_poly,
)
from .report import ScanTable, scan, to_csv, to_json_str
from .simons import (
    ViolationReport,
    frobenius_identity,
    homogeneous_improved_check,
    sample_points,
    verify_general_inequality,
)
from .stability import (
    Certificate,
    EulerZeros,
    PositiveSolution,
    SpectralResult,
    StabilityReport,
    euler_zeros,
    instability_certificate,
    mean_curvature,
    positive_solution,
    rayleigh_lambda,
    stability_threshold,
    stability_verdict,
)
from .weights import (
    FROBENIUS,
    MAX_EIGENVALUE,
    SIGNED4,
    Spectrum,
    WeightSpec,
    eval_weight,
    identity_nf,
    signed,
    weight_gradient,
    weight_laplacian,
)

__version__ = "0.1.0"
