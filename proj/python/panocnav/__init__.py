"""Obstacle-avoiding nonlinear MPC: quadratic penalty method around PANOC."""

from ._core import (
    ConstraintExpr,
    CostWeights,
    EvaluationError,
    ExprParseError,
    MissionConfig,
    MissionLog,
    ObstacleSpec,
    PenaltyConfig,
    PenaltyOutcome,
    ProblemSpec,
    Scenario,
    ScenarioLoadError,
    SolveReport,
    VehicleModel,
    VehicleState,
    apply_enlargement,
    continuous_dynamics,
    eval_objective,
    eval_objective_gradient,
    grid_search,
    load_scenario,
    max_obstacle_violation,
    panoc_solve,
    parse_constraint,
    penalty_solve,
    rk4_step,
    rollout,
    run_mission,
)

__all__ = [
    "ConstraintExpr",
    "CostWeights",
    "EvaluationError",
    "ExprParseError",
    "MissionConfig",
    "MissionLog",
    "ObstacleSpec",
    "PenaltyConfig",
    "PenaltyOutcome",
    "ProblemSpec",
    "Scenario",
    "ScenarioLoadError",
    "SolveReport",
    "VehicleModel",
    "VehicleState",
    "apply_enlargement",
    "continuous_dynamics",
    "eval_objective",
    "eval_objective_gradient",
    "grid_search",
    "load_scenario",
    "max_obstacle_violation",
    "panoc_solve",
    "parse_constraint",
    "penalty_solve",
    "rk4_step",
    "rollout",
    "run_mission",
]
