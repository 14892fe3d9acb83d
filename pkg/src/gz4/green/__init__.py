"""Weight-4 higher Green's functions for conjugates of Gamma0(N)."""

from .checks import BadFit, PoleFit, StepTooSmall, laplacian_residual, pole_coefficient
from .evaluator import EvalResult, PoleHit, green_pair
from .functions import (
    DegeneratePole,
    GreenSpec,
    HeckeRelation,
    green_basic,
    green_hat,
    green_relation,
    hat_poles,
    hecke_translate,
)
from .kernel import DomainError, legendre_q1, point_pair_invariant

__all__ = [
    "BadFit", "DegeneratePole", "DomainError", "EvalResult", "GreenSpec", "HeckeRelation",
    "PoleFit", "PoleHit", "StepTooSmall", "green_basic", "green_hat", "green_pair",
    "green_relation", "hat_poles", "hecke_translate", "laplacian_residual",
    "legendre_q1", "point_pair_invariant", "pole_coefficient",
]
