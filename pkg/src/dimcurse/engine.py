"""Dimension-recursive composition of univariate optimizers.

A run sweeps an odometer of per-dimension counters (tau_1, ..., tau_d) over
the budget grid, dimension d fastest.  Each dimension owns a fresh univariate
optimizer instance per block of its slower-dimension prefix: its queries and
its h-table (the running minimum evaluation seen while each query was the
active coordinate) restart whenever a slower counter changes.  The h-table is
what the dimension's optimizer observes, so inner minima reach outer
optimizers as conditional minima plus a nonnegative, shrinking noise.

A single run is strictly sequential (every query depends on all previous
evaluations); distinct runs share nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .budgets import doubling_epochs, split_budget
from .types import (
    BudgetSchedule,
    EvalRecord,
    EvaluationLog,
    MetaState,
    NonFiniteEvaluationError,
    ObjectiveSpec,
)
from .univariate import OptimizerConfig, OptimizerKind, propose_trusted


def time_index(counters: Sequence[int], budgets: Sequence[int]) -> int:
    """Time index t = 1 + sum_i (tau_i - 1) * prod_{j>i} T_j."""
    if len(counters) != len(budgets):
        raise ValueError("counters and budgets must have equal length")
    if any(not 1 <= c <= b for c, b in zip(counters, budgets)):
        raise ValueError(f"counters {tuple(counters)} out of range for budgets {tuple(budgets)}")
    t = 1
    stride = 1
    for c, b in zip(reversed(counters), reversed(budgets)):
        t += (c - 1) * stride
        stride *= b
    return t


def advance(state: MetaState, budgets: Sequence[int]) -> int:
    """Step the counter odometer once; return the reset depth I.

    Increments tau_d with carry: an overflowing counter resets to 1 and bumps
    the next slower one.  I is the deepest dimension whose counter did not
    reset; dimensions I+1..d need fresh initial queries and dimension I a
    proposal from its optimizer.
    """
    counters = state.counters
    d = len(counters)
    if counters[-1] >= budgets[-1] and all(
        c >= b for c, b in zip(counters, budgets)
    ):
        raise ValueError("cannot advance past the final counter configuration")
    state.counters[d - 1] += 1
    for i in range(d - 1, 0, -1):  # dimensions d..2, 0-indexed i is dim i+1
        if state.counters[i] > budgets[i]:
            state.counters[i] = 1
            state.counters[i - 1] += 1
    depth = d
    while state.counters[depth - 1] == 1:
        depth -= 1
    return depth


def optimizer_configs(
    schedule: BudgetSchedule, kind: OptimizerKind, lipschitz: float
) -> tuple[OptimizerConfig, ...]:
    """One inner-optimizer config per dimension.

    Single-coordinate slices of an L-Lipschitz function are L-Lipschitz for
    any of the supported norms, so every dimension inherits L unchanged.
    """
    return tuple(
        OptimizerConfig(
            kind=kind,
            horizon=budget,
            lipschitz_constant=lipschitz,
            noise_bound=eps,
        )
        for budget, eps in zip(schedule.budgets, schedule.noise_bounds)
    )


def _evaluate(objective: ObjectiveSpec, state: MetaState, t: int) -> EvalRecord:
    counters = state.counters
    point = tuple(
        h[c - 1] for h, c in zip(state.histories, counters)
    )
    value = objective.evaluate(point)
    record = EvalRecord(t=t, counters=tuple(counters), point=point, value=value)
    if not math.isfinite(value):
        raise NonFiniteEvaluationError(record)
    return record


def step(
    state: MetaState,
    objective: ObjectiveSpec,
    schedule: BudgetSchedule,
    configs: Sequence[OptimizerConfig],
) -> EvalRecord:
    """Advance the run by one evaluation, mutating ``state``.

    On the first call every dimension takes its optimizer's initial (t=1)
    query.  Afterwards: advance the odometer to reset depth I, restart
    dimensions deeper than I with fresh initial queries, ask dimension I's
    optimizer for its next query given the current histories and h-values,
    evaluate once, then write the value into the h-tables: overwrite for the
    just-(re)queried dimensions I..d, min-merge for the untouched 1..I-1.
    Fresh blocks must not inherit minima from a previous prefix block, hence
    the overwrite.
    """
    d = len(state.counters)
    if state.steps_done == 0:
        for i in range(d):
            state.histories[i].append(propose_trusted(configs[i], (), (), 1))
        record = _evaluate(objective, state, t=1)
        for i in range(d):
            state.cond_min[i].append(record.value)
        state.steps_done = 1
        return record

    depth = advance(state, schedule.budgets)
    for i in range(depth, d):  # dimensions deeper than I restart
        state.histories[i] = [propose_trusted(configs[i], (), (), 1)]
        state.cond_min[i] = [math.inf]
    i = depth - 1
    state.histories[i].append(
        propose_trusted(
            configs[i], state.histories[i], state.cond_min[i], state.counters[i]
        )
    )
    state.cond_min[i].append(math.inf)

    # The odometer enumerates counter states in row-major order, so the next
    # ordinal equals the time-index formula; audits recheck this from records.
    t = state.steps_done + 1
    state.steps_done = t
    record = _evaluate(objective, state, t)
    for i in range(depth - 1, d):  # overwrite: i >= I (0-indexed depth-1..d-1)
        state.cond_min[i][state.counters[i] - 1] = record.value
    for i in range(depth - 1):  # min-merge: i < I
        j = state.counters[i] - 1
        state.cond_min[i][j] = min(record.value, state.cond_min[i][j])
    return record


@dataclass(frozen=True)
class RunResult:
    log: EvaluationLog
    state: MetaState

    def final_tables(self) -> list[dict[float, float]]:
        return [self.state.table(i) for i in range(1, self.state.dimension + 1)]


def run(
    objective: ObjectiveSpec,
    schedule: BudgetSchedule,
    kind: OptimizerKind = OptimizerKind.PIYAVSKII_SHUBERT,
    max_evals: int | None = None,
) -> RunResult:
    """Execute a full (or truncated) run and collect its evaluation log."""
    if schedule.dimension != objective.dimension:
        raise ValueError(
            f"schedule has {schedule.dimension} budgets but objective has "
            f"dimension {objective.dimension}"
        )
    total = schedule.total()
    if max_evals is not None:
        if max_evals < 1:
            raise ValueError("max_evals must be positive")
        total = min(total, max_evals)
    configs = optimizer_configs(schedule, kind, objective.lipschitz_constant)
    state = MetaState.initial(objective.dimension)
    records = []
    for _ in range(total):
        records.append(step(state, objective, schedule, configs))
    return RunResult(
        log=EvaluationLog(budgets=schedule.budgets, records=tuple(records)),
        state=state,
    )


@dataclass(frozen=True)
class EpochResult:
    epoch_index: int
    epoch_length: int
    schedule: BudgetSchedule
    result: RunResult


def run_unknown_horizon(
    objective: ObjectiveSpec,
    total: int,
    kind: OptimizerKind = OptimizerKind.PIYAVSKII_SHUBERT,
    noise_bounds: Sequence[float] | None = None,
) -> list[EpochResult]:
    """Doubling-trick execution for an unknown horizon.

    Each epoch of length e restarts the engine on the budget factorization of
    e and stops after exactly e evaluations (the factorized grid may hold
    more).  Epoch lengths sum to the requested total.
    """
    epochs = doubling_epochs(total)
    out: list[EpochResult] = []
    for idx, length in enumerate(epochs.epochs):
        budgets = split_budget(length, objective.dimension)
        if noise_bounds is None:
            schedule = BudgetSchedule.with_default_noise(budgets)
        else:
            schedule = BudgetSchedule(budgets=budgets, noise_bounds=tuple(noise_bounds))
        result = run(objective, schedule, kind, max_evals=length)
        out.append(
            EpochResult(
                epoch_index=idx, epoch_length=length, schedule=schedule, result=result
            )
        )
    return out


def recompute_final_tables(log: EvaluationLog) -> list[list[float]]:
    """Recover the end-of-run h-tables for a full run directly from its log.

    For dimension i the final block fixes dimensions 1..i-1 at their last
    counter values; entry j is the minimum evaluation over records in that
    block whose dimension-i counter equals j.  Used as the independent check
    of the engine's incremental table maintenance.
    """
    if not log.records:
        raise ValueError("empty log")
    final = log.records[-1].counters
    d = log.dimension
    tables: list[list[float]] = []
    for i in range(d):
        prefix = final[:i]
        block = [r for r in log.records if r.counters[:i] == prefix]
        size = max(r.counters[i] for r in block)
        entries = [math.inf] * size
        for r in block:
            j = r.counters[i] - 1
            entries[j] = min(entries[j], r.value)
        tables.append(entries)
    return tables
