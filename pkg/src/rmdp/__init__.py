"""Robust MDP modelling and solving: interval, L1, point and multi-environment models."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Diagnostic,
    Dtmc,
    Model,
    ModelError,
    StationaryPolicy,
    build_model,
    enabled_actions,
    induce_dtmc,
    validate,
)
from .solver import (  # noqa: E402
    Discounted,
    Mode,
    Reachability,
    ReachReward,
    SolveResult,
    ValueVector,
    extract_policy,
    memdp_best_stationary,
    memdp_evaluate,
    policy_evaluation,
    policy_iteration,
    solve,
    value_iteration,
)
from .uncertainty import InnerResult, IntervalRow, L1Row, PointRow, inner_extremum  # noqa: E402

__all__ = [
    "Diagnostic",
    "Discounted",
    "Dtmc",
    "InnerResult",
    "IntervalRow",
    "L1Row",
    "Mode",
    "Model",
    "ModelError",
    "PointRow",
    "Reachability",
    "ReachReward",
    "SolveResult",
    "StationaryPolicy",
    "ValueVector",
    "build_model",
    "enabled_actions",
    "extract_policy",
    "induce_dtmc",
    "inner_extremum",
    "memdp_best_stationary",
    "memdp_evaluate",
    "policy_evaluation",
    "policy_iteration",
    "solve",
    "validate",
    "value_iteration",
]
