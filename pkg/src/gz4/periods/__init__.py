"""Laurent polynomials, period sequences, Picard-Fuchs operators and basechange checks."""

from .frobenius import (
    BasechangeMap,
    FrobeniusBasis,
    MirrorMap,
    NotMUM,
    PullbackReport,
    frobenius_solutions,
    mirror_map,
    pullback_check,
    rebase_to_infinity,
    series_compose,
    series_exp,
    series_inv,
    series_mul,
    series_revert,
)
from .laurent import LaurentParseError, LaurentPolynomial3, laurent_from_terms, parse_laurent
from .operators import (
    HolonomicOperator,
    SingularLocus,
    SingularPoint,
    apply_ode,
    apply_rec,
    find_recurrence,
    integer_kernel,
    ode_to_rec,
    rec_to_ode,
    singular_points,
)
from .polytope import (
    LatticePolytope3,
    OriginNotInterior,
    RationalPolytope3,
    convex_hull_vertices,
    facet_distances,
    is_reflexive,
    newton_polytope,
    polar_dual,
)
from .sequence import PeriodSequence, period_sequence, period_sequence_naive

__all__ = [
    "BasechangeMap",
    "FrobeniusBasis",
    "HolonomicOperator",
    "LatticePolytope3",
    "LaurentParseError",
    "LaurentPolynomial3",
    "MirrorMap",
    "NotMUM",
    "OriginNotInterior",
    "PeriodSequence",
    "PullbackReport",
    "RationalPolytope3",
    "SingularLocus",
    "SingularPoint",
    "apply_ode",
    "apply_rec",
    "convex_hull_vertices",
    "facet_distances",
    "find_recurrence",
    "frobenius_solutions",
    "integer_kernel",
    "is_reflexive",
    "laurent_from_terms",
    "mirror_map",
    "newton_polytope",
    "ode_to_rec",
    "parse_laurent",
    "period_sequence",
    "period_sequence_naive",
    "polar_dual",
    "pullback_check",
    "rebase_to_infinity",
    "rec_to_ode",
    "series_compose",
    "series_exp",
    "series_inv",
    "series_mul",
    "series_revert",
    "singular_points",
]
