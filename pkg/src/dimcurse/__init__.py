"""Recursive composition of univariate Lipschitz optimizers on the unit cube."""

from .budgets import EpochSchedule, doubling_epochs, integer_root_floor, split_budget
from .engine import (
    EpochResult,
    RunResult,
    advance,
    recompute_final_tables,
    run,
    run_unknown_horizon,
    step,
    time_index,
)
from .regret import (
    AUDIT_TOL,
    Block,
    BoundFactor,
    BoundKind,
    DecompositionReport,
    audit_decomposition,
    average_regret,
    build_report,
    cumulative_bound,
    noise_gap,
    pseudo_regret,
    regret_trend,
    split_blocks,
    strong_bound,
    unknown_horizon_bound,
    weak_bound,
)
from .types import (
    BoundCheck,
    BudgetSchedule,
    EvalRecord,
    EvaluationLog,
    GridSizeError,
    MetaState,
    NonFiniteEvaluationError,
    Norm,
    ObjectiveSpec,
    RegretReport,
    RegularityViolation,
    RobustnessProfile,
    UnknownObjectiveError,
    validate_regularity,
)
from .univariate import (
    OptimizerConfig,
    OptimizerKind,
    UnivariateHistory,
    envelope_curve,
    envelope_min,
    envelope_value,
    measure_robustness,
    propose,
    run_univariate,
)

__version__ = "0.1.0"
