"""Exact feasibility decisions and tie-break optimization over constraint systems."""

from .core import (
    AuditError,
    FeasibilityResult,
    InfeasibleSystemError,
    RationalPlanWarning,
    RedistributionPlan,
    TiebreakWeights,
    check_feasible,
    discarded,
    movement,
    optimize_tiebreak,
    presolve,
)

__all__ = [
    "AuditError",
    "FeasibilityResult",
    "InfeasibleSystemError",
    "RationalPlanWarning",
    "RedistributionPlan",
    "TiebreakWeights",
    "check_feasible",
    "discarded",
    "movement",
    "optimize_tiebreak",
    "presolve",
]
