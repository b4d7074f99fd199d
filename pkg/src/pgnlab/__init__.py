"""Exact-arithmetic laboratory for parametric lattice geometry.

Rigid piecewise-linear component systems, exact successive minima of a
one-parameter family of convex bodies, heuristic approximation-class
diagnostics, and multilinear (wedge) search tools, all over unbounded
rationals.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    ConstraintInfeasible,
    DependentBasis,
    DimensionMismatch,
    DiscontinuousJoin,
    DomainMismatch,
    ExhaustedWithoutWitness,
    GapOrOverlap,
    GradeOverflow,
    GrowthViolation,
    InsufficientData,
    InvalidParams,
    InvalidTau,
    OutOfDomain,
    PgnError,
    ZeroInput,
)
from .ratpl import (
    INF,
    ExtendedRational,
    PLMap,
    Rational,
    concat,
    eval_with_slopes,
    extremize,
    normalize,
    rat,
    rat_str,
)

__all__ = [
    "BudgetExceeded",
    "ConstraintInfeasible",
    "DependentBasis",
    "DimensionMismatch",
    "DiscontinuousJoin",
    "DomainMismatch",
    "ExhaustedWithoutWitness",
    "GapOrOverlap",
    "GradeOverflow",
    "GrowthViolation",
    "InsufficientData",
    "InvalidParams",
    "InvalidTau",
    "OutOfDomain",
    "PgnError",
    "ZeroInput",
    "INF",
    "ExtendedRational",
    "PLMap",
    "Rational",
    "concat",
    "eval_with_slopes",
    "extremize",
    "normalize",
    "rat",
    "rat_str",
    "__version__",
]
