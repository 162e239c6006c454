"""Self-similar actions of SL(n, Z_p) on rooted trees, with the Bruhat-Tits
building of SL(n, Q_p) and quaternion division algebras as the geometric
and anisotropic counterparts."""

from .congruence import GroupElement, Transversal, enumerate_transversal
from .endo import VirtualEndo, apply, check_invariance, make_endo, normality_witness
from .engine import (
    Action,
    act_and_restrict,
    act_letter,
    act_word,
    build_action,
    default_action,
    portrait,
    restriction,
    separating_depth,
)
from .errors import (
    BudgetError,
    InvariantViolation,
    NotInvertibleError,
    PrecisionError,
    PreconditionError,
    SelfSimError,
)
from .padic import PMatrix, TruncatedPadic

__all__ = [
    "Action",
    "BudgetError",
    "GroupElement",
    "InvariantViolation",
    "NotInvertibleError",
    "PMatrix",
    "PrecisionError",
    "PreconditionError",
    "SelfSimError",
    "Transversal",
    "TruncatedPadic",
    "VirtualEndo",
    "act_and_restrict",
    "act_letter",
    "act_word",
    "apply",
    "build_action",
    "check_invariance",
    "default_action",
    "enumerate_transversal",
    "make_endo",
    "normality_witness",
    "portrait",
    "restriction",
    "separating_depth",
]
