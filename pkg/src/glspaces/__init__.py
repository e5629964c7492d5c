"""Numerical toolkit for Grand Lebesgue Spaces.

Computes Lebesgue and Grand Lebesgue norms of concrete functions,
convolutions of generating functions, composition operators with their
pushforward densities, bound certificates, and a sufficient compactness
criterion.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DisjointSupports,
    DivergentNorm,
    EstimationUnstable,
    EvalDomainError,
    ExprSyntaxError,
    FactorizationMismatch,
    GlsError,
    InvalidSupport,
    InversionFailed,
    MaxSubdivisionsExceeded,
    NonPositiveScale,
    NotMonotone,
    NowhereIntegrable,
    RangeMismatch,
    SingularMatrix,
    UnknownIdentifier,
)
from .expr import evaluate, parse, to_source  # noqa: F401
from .quadrature import (  # noqa: F401
    Box,
    LpResult,
    MeasureSpace,
    RealFunction,
    RealLine,
    UnitInterval,
    box,
    estimate_exponent,
    fn,
    fn_from_callable,
    lp_norm,
    real_line,
    unit_lebesgue,
)
from .psi import (  # noqa: F401
    PsiFunction,
    PsiValidationReport,
    Support,
    canonical_grid,
    homothety,
    make_psi,
    natural_psi,
    psi_from_expr,
    psi_from_json,
    psi_from_table,
    psi_to_json,
    validate,
)
from .gls import GlsNormReport, GlsOptions, gls_norm  # noqa: F401
from .odot import (  # noqa: F401
    OdotResult,
    OdotValue,
    odot,
    odot_tabulate,
    power_substitution_value,
    power_theta,
)
from .composition import (  # noqa: F401
    BoundReport,
    CompositionMap,
    FundamentalValue,
    compose,
    fundamental_function,
    holder_split,
    identity_map,
    linear_bound_check,
    linear_substitute,
    pushforward_density,
    pushforward_identity_residual,
    verify_bound,
)
from .compactness import (  # noqa: F401
    CompactnessOptions,
    CompactnessReport,
    check_compactness,
)
from .scenarios import ExampleReport, run_example  # noqa: F401
