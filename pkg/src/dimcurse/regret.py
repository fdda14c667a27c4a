"""Regret quantities, robustness bound formulas, and empirical audits.

The bound formulas are pure arithmetic in the dimension, the smallest
per-dimension budget, and a measured noise-sensitivity coefficient of the
inner 1D optimizer.  The audits check the underlying block decomposition
inequality and the bounds against real runs, carrying the grid oracle's error
bound and degrading to "inconclusive" when it could swamp the comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .budgets import integer_root_floor, split_budget
from .engine import run
from .types import (
    BoundCheck,
    BudgetSchedule,
    EvalRecord,
    EvaluationLog,
    ObjectiveSpec,
    Point,
    RegretReport,
)
from .univariate import OptimizerKind

#: Comparison slack for the decomposition inequality audit.
AUDIT_TOL = 1e-9

#: The oracle error above this fraction of |RHS| makes an audit inconclusive.
ORACLE_ERROR_FRACTION = 1e-3


def average_regret(values: Sequence[float], f_star: float) -> float:
    """(1/T) * sum(values) - f_star."""
    if not values:
        raise ValueError("average regret of an empty value list is undefined")
    return sum(values) / len(values) - f_star


def pseudo_regret(noisy_values: Sequence[float], f_star: float) -> float:
    """Average regret computed on noise-inflated observations."""
    return average_regret(noisy_values, f_star)


class BoundKind(str, enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class BoundFactor:
    """The dimension factor F(d, T_1) multiplying the 1D base regret."""

    kind: BoundKind
    dimension: int
    smallest_budget: int
    coefficient: float

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind is BoundKind.STRONG and self.coefficient < 0:
            raise ValueError("strong coefficient (alpha) must be >= 0")
        if self.kind is BoundKind.WEAK and self.coefficient < 1:
            raise ValueError("weak coefficient (beta) must be >= 1")

    def value(self) -> float:
        d = self.dimension
        if self.kind is BoundKind.STRONG:
            return d * (1.0 + self.coefficient) ** (d - 1)
        return 0.5 * (d + 1) * d * self.coefficient ** (d - 1)


def strong_bound(dimension: int, alpha_t1: float, r1_t1: float) -> float:
    """Average-regret bound d * (1 + alpha)^(d-1) * r1 for a strongly robust inner optimizer."""
    factor = BoundFactor(BoundKind.STRONG, dimension, 0, alpha_t1)
    return factor.value() * r1_t1


def weak_bound(dimension: int, beta_t1: float, r1_t1: float) -> float:
    """Average-regret bound 0.5 * (d+1) * d * beta^(d-1) * r1 for a weakly robust inner optimizer."""
    factor = BoundFactor(BoundKind.WEAK, dimension, 0, beta_t1)
    return factor.value() * r1_t1


def cumulative_bound(total: int, factor: BoundFactor, r1_at_floor: float) -> float:
    """Cumulative-regret bound 2 * T * F(d, floor(T^(1/d))) * r1."""
    if total < 1:
        raise ValueError("total must be >= 1")
    return 2.0 * total * factor.value() * r1_at_floor


def unknown_horizon_bound(total: int, factor: BoundFactor, r1_at_floor: float) -> float:
    """Average-regret bound 2 * log2(2T) * F(d, floor(T^(1/d))) * r1 under doubling."""
    if total < 1:
        raise ValueError("total must be >= 1")
    return 2.0 * math.log2(2.0 * total) * factor.value() * r1_at_floor


# ---------------------------------------------------------------------------
# Block decomposition of a log and the audits built on it

ConditionalOracle = Callable[[Point], tuple[float, float]]


@dataclass(frozen=True)
class Block:
    prefix_counters: tuple[int, ...]
    prefix_point: Point
    records: tuple[EvalRecord, ...]


def split_blocks(log: EvaluationLog, split: int) -> list[Block]:
    """Group consecutive records by their first ``split`` counters.

    Within a block the prefix coordinates are constant: slower dimensions
    only re-query when their counter advances.
    """
    if not 1 <= split < log.dimension:
        raise ValueError(f"split must be in [1, {log.dimension - 1}], got {split}")
    blocks: list[Block] = []
    current: list[EvalRecord] = []
    key: tuple[int, ...] | None = None
    for record in log.records:
        k = record.counters[:split]
        if k != key and current:
            blocks.append(
                Block(key, current[0].point[:split], tuple(current))
            )
            current = []
        key = k
        current.append(record)
    blocks.append(Block(key, current[0].point[:split], tuple(current)))
    return blocks


def noise_gap(
    log: EvaluationLog, oracle: ConditionalOracle, split: int = 1
) -> float:
    """Worst shortfall of a block's best evaluation vs its conditional minimum.

    This is the bound on the nonnegative "noise" the slower-dimension
    optimizer saw in its h-values.  Needs d >= 2.
    """
    if log.dimension < 2:
        raise ValueError("noise gap is undefined for 1D logs")
    gap = -math.inf
    for block in split_blocks(log, split):
        best = min(r.value for r in block.records)
        cond, _ = oracle(block.prefix_point)
        gap = max(gap, best - cond)
    return gap


@dataclass(frozen=True)
class DecompositionReport:
    bound_name: str
    split: int
    lhs: float
    rhs: float
    inner_term: float
    outer_term: float
    margin: float
    oracle_error: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "split": self.split,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "inner_term": self.inner_term,
            "outer_term": self.outer_term,
            "margin": self.margin,
            "oracle_error": self.oracle_error,
            "verdict": self.verdict,
        }


def audit_decomposition(
    log: EvaluationLog,
    oracle: ConditionalOracle,
    f_star: float,
    f_star_error: float = 0.0,
    split: int = 1,
) -> DecompositionReport:
    """Check the regret split across a dimension boundary on a finished run.

    LHS is the run's average regret.  RHS adds the worst per-block inner
    average regret (block mean minus the block's conditional minimum) to the
    outer average regret of the conditional minima themselves; the
    decomposition guarantees LHS <= RHS.  Verdict is "inconclusive" instead
    of "violated" or "holds" when the oracle's error bound could swamp the
    comparison.
    """
    blocks = split_blocks(log, split)
    lhs = average_regret([r.value for r in log.records], f_star)
    inner_term = -math.inf
    cond_values = []
    worst_oracle_error = 0.0
    for block in blocks:
        cond, err = oracle(block.prefix_point)
        cond_values.append(cond)
        worst_oracle_error = max(worst_oracle_error, err)
        block_mean = sum(r.value for r in block.records) / len(block.records)
        inner_term = max(inner_term, block_mean - cond)
    outer_term = sum(cond_values) / len(cond_values) - f_star
    rhs = inner_term + outer_term
    margin = rhs - lhs
    oracle_error = 2.0 * worst_oracle_error + f_star_error
    if oracle_error > ORACLE_ERROR_FRACTION * abs(rhs):
        verdict = "inconclusive"
    elif lhs <= rhs + AUDIT_TOL:
        verdict = "holds"
    else:
        verdict = "violated"
    return DecompositionReport(
        bound_name="block-decomposition",
        split=split,
        lhs=lhs,
        rhs=rhs,
        inner_term=inner_term,
        outer_term=outer_term,
        margin=margin,
        oracle_error=oracle_error,
        verdict=verdict,
    )


@dataclass(frozen=True)
class TrendReport:
    budgets: tuple[int, ...]
    average_regret: tuple[float, ...]
    nonincreasing: bool


def regret_trend(
    objective: ObjectiveSpec,
    kind: OptimizerKind,
    totals: Sequence[int],
    f_star: float,
) -> TrendReport:
    """Measured average regret across total budgets, with a monotonicity flag.

    Nonincreasing average regret is a hypothesis to report, not to assert.
    """
    regrets = []
    for total in totals:
        schedule = BudgetSchedule.with_default_noise(
            split_budget(total, objective.dimension)
        )
        result = run(objective, schedule, kind)
        regrets.append(average_regret(result.log.values(), f_star))
    flags = [a + 1e-12 >= b for a, b in zip(regrets, regrets[1:])]
    return TrendReport(
        budgets=tuple(totals),
        average_regret=tuple(regrets),
        nonincreasing=all(flags),
    )


def floor_root_budget(total: int, dimension: int) -> int:
    """floor(T**(1/d)), the budget at which cumulative-style bounds are read."""
    return integer_root_floor(total, dimension)


def build_report(
    logs: Sequence[EvaluationLog],
    f_star: float,
    f_star_error: float,
    f_star_source: str,
    oracle: ConditionalOracle | None = None,
    bound_checks: Sequence[BoundCheck] = (),
) -> RegretReport:
    """Assemble the regret report of one or more runs over the same objective.

    Pseudo-regret equals the average regret here because run observations
    carry no external noise; the noise gap (worst epoch, when ``oracle`` is
    given and the logs are multivariate) quantifies the only noise in play,
    the shortfall inside the h-tables.
    """
    if not logs:
        raise ValueError("need at least one log")
    values = [v for log in logs for v in log.values()]
    r = average_regret(values, f_star)
    gap = None
    if oracle is not None and logs[0].dimension >= 2:
        gap = max(noise_gap(log, oracle) for log in logs)
    return RegretReport(
        average_regret=r,
        average_pseudo_regret=r,
        cumulative_regret=len(values) * r,
        noise_gap=gap,
        f_star=f_star,
        f_star_error=f_star_error,
        f_star_source=f_star_source,
        total_evaluations=len(values),
        bound_checks=tuple(bound_checks),
    )
