"""Request handlers shared by the HTTP routes and the in-process CLI client.

Each handler is a pure function from a request model to a response model;
errors surface as the typed exceptions below and are mapped to HTTP statuses
(or exit codes) by the callers.
"""

from __future__ import annotations

import math

from .. import benchmarks, regret
from ..budgets import split_budget
from ..engine import EpochResult, run, run_unknown_horizon
from ..types import BoundCheck, BudgetSchedule, EvaluationLog, ObjectiveSpec
from ..univariate import (
    OptimizerKind,
    UnivariateHistory,
    envelope_curve,
    measure_robustness,
)
from .models import (
    AuditRequest,
    AuditResponse,
    BoundCheckModel,
    DecompositionModel,
    EpochRunModel,
    EvalRecordModel,
    ObjectiveInfo,
    RegretReportModel,
    RobustnessModel,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
    TrendModel,
)


class ConfigError(ValueError):
    """Semantically invalid experiment configuration."""


def list_objectives() -> list[ObjectiveInfo]:
    out = []
    for entry in benchmarks.catalog():
        out.append(
            ObjectiveInfo(
                name=entry.name,
                dimension=entry.objective.dimension,
                lipschitz_constant=entry.objective.lipschitz_constant,
                norm=entry.objective.norm_kind.value,
                known_minimum=entry.objective.known_minimum,
                analytic_argmin=list(entry.analytic_argmin)
                if entry.analytic_argmin is not None
                else None,
                notes=entry.notes,
            )
        )
    return out


def _noise_bounds(
    raw: list[float | None] | None, dimension: int
) -> tuple[float, ...] | None:
    if raw is None:
        return None
    if len(raw) != dimension:
        raise ConfigError(
            f"noise_bounds has {len(raw)} entries for a {dimension}-dimensional objective"
        )
    bounds = tuple(math.inf if v is None else float(v) for v in raw)
    if any(b < 0 for b in bounds):
        raise ConfigError("noise bounds must be nonnegative")
    return bounds


def _schedule_for(
    objective: ObjectiveSpec,
    budget: int | None,
    budgets: list[int] | None,
    noise: tuple[float, ...] | None,
) -> BudgetSchedule:
    d = objective.dimension
    try:
        if budgets:
            chosen = tuple(int(b) for b in budgets)
            if len(chosen) != d:
                raise ConfigError(
                    f"{len(chosen)} budgets given for a {d}-dimensional objective"
                )
        else:
            chosen = split_budget(budget, d)
        if noise is None:
            return BudgetSchedule.with_default_noise(chosen)
        return BudgetSchedule(budgets=chosen, noise_bounds=noise)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_dims(entry: benchmarks.CatalogEntry, dims: int | None) -> None:
    if dims is not None and dims != entry.objective.dimension:
        raise ConfigError(
            f"objective {entry.name!r} has dimension {entry.objective.dimension}, "
            f"not {dims}"
        )


def _record_models(log: EvaluationLog) -> list[EvalRecordModel]:
    return [
        EvalRecordModel(t=r.t, tau=list(r.counters), x=list(r.point), f=r.value)
        for r in log.records
    ]


def _wire_noise(schedule: BudgetSchedule) -> list[float | None]:
    return [None if math.isinf(e) else e for e in schedule.noise_bounds]


def _execute(req: RunRequest | AuditRequest, entry: benchmarks.CatalogEntry) -> list[EpochResult]:
    objective = entry.objective
    kind = OptimizerKind(req.optimizer)
    noise = _noise_bounds(req.noise_bounds, objective.dimension)
    if req.horizon == "unknown":
        try:
            return run_unknown_horizon(objective, req.budget, kind, noise)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    schedule = _schedule_for(objective, req.budget, req.budgets, noise)
    result = run(objective, schedule, kind)
    return [
        EpochResult(
            epoch_index=0,
            epoch_length=schedule.total(),
            schedule=schedule,
            result=result,
        )
    ]


def _build_report(
    logs: list[EvaluationLog],
    entry: benchmarks.CatalogEntry,
    oracle_resolution: int,
    force_grid_oracle: bool = False,
    bound_checks: list[BoundCheck] | None = None,
) -> RegretReportModel:
    objective = entry.objective
    f_star, f_err, f_src = benchmarks.entry_f_star(entry, oracle_resolution)
    oracle = None
    if objective.dimension >= 2:
        oracle = benchmarks.conditional_oracle(
            entry, objective, oracle_resolution, force_grid=force_grid_oracle
        )
    report = regret.build_report(
        logs, f_star, f_err, f_src, oracle, tuple(bound_checks or ())
    )
    return RegretReportModel(
        average_regret=report.average_regret,
        average_pseudo_regret=report.average_pseudo_regret,
        cumulative_regret=report.cumulative_regret,
        noise_gap=report.noise_gap,
        f_star=report.f_star,
        f_star_error=report.f_star_error,
        f_star_source=report.f_star_source,
        total_evaluations=report.total_evaluations,
        bound_checks=[
            BoundCheckModel(
                name=c.name, bound=c.bound, measured=c.measured, satisfied=c.satisfied
            )
            for c in report.bound_checks
        ],
    )


def handle_run(req: RunRequest) -> RunResponse:
    entry = benchmarks.get_entry(req.objective)
    _check_dims(entry, req.dims)
    epochs = _execute(req, entry)
    logs = [e.result.log for e in epochs]
    report = _build_report(logs, entry, req.oracle_resolution)
    envelope = None
    if req.include_envelope and entry.objective.dimension == 1:
        state = epochs[-1].result.state
        history = UnivariateHistory(
            tuple(state.histories[0]), tuple(state.cond_min[0])
        )
        envelope = envelope_curve(history, entry.objective.lipschitz_constant)
    return RunResponse(
        objective=entry.name,
        dimension=entry.objective.dimension,
        optimizer=req.optimizer,
        horizon=req.horizon,
        noise_bounds=_wire_noise(epochs[0].schedule),
        epochs=[
            EpochRunModel(
                epoch_index=e.epoch_index,
                epoch_length=e.epoch_length,
                budgets=list(e.schedule.budgets),
                records=_record_models(e.result.log),
            )
            for e in epochs
        ],
        report=report,
        envelope=envelope,
    )


def _marginal_objective(
    entry: benchmarks.CatalogEntry, oracle_resolution: int
) -> ObjectiveSpec:
    """The 1D objective the outermost optimizer effectively faces."""
    objective = entry.objective
    if objective.dimension == 1:
        return objective
    if entry.marginal is not None:
        return entry.marginal
    f_star, _, _ = benchmarks.entry_f_star(entry, oracle_resolution)
    return ObjectiveSpec(
        dimension=1,
        evaluate=lambda p: benchmarks.conditional_minimum(
            objective, p, oracle_resolution
        ).value,
        lipschitz_constant=objective.lipschitz_constant,
        norm_kind=objective.norm_kind,
        known_minimum=f_star,
    )


def handle_audit(req: AuditRequest) -> AuditResponse:
    entry = benchmarks.get_entry(req.objective)
    _check_dims(entry, req.dims)
    objective = entry.objective
    d = objective.dimension
    kind = OptimizerKind(req.optimizer)

    if req.records is not None:
        try:
            log = EvaluationLog.from_records(
                [(m.t, m.tau, m.x, m.f) for m in req.records],
                budgets=req.budgets,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if log.dimension != d:
            raise ConfigError(
                f"records are {log.dimension}-dimensional but {entry.name} has dimension {d}"
            )
        logs = [log]
        single_full_log = True
        horizon_mode = "known"
    else:
        epochs = _execute(req, entry)
        logs = [e.result.log for e in epochs]
        single_full_log = req.horizon == "known"
        horizon_mode = req.horizon

    values = [v for log in logs for v in log.values()]
    total = len(values)
    f_star, f_err, f_src = benchmarks.entry_f_star(entry, req.oracle_resolution)
    measured_r = regret.average_regret(values, f_star)
    measured_cumulative = total * measured_r

    t1 = logs[0].budgets[0] if single_full_log else regret.floor_root_budget(total, d)
    floor_t1 = regret.floor_root_budget(total, d)
    horizons = sorted({t1, floor_t1})
    marginal = _marginal_objective(entry, req.oracle_resolution)
    profiles = {
        p.horizon: p
        for p in measure_robustness(kind, marginal, req.robustness_epsilon, horizons)
    }
    prof_t1 = profiles[t1]
    prof_floor = profiles[floor_t1]

    strong = regret.strong_bound(d, prof_t1.alpha, prof_t1.base_regret)
    weak = regret.weak_bound(d, prof_t1.beta, prof_t1.base_regret)
    checks = [
        BoundCheck("strong-robust-average", strong, measured_r, measured_r <= strong + regret.AUDIT_TOL),
        BoundCheck("weak-robust-average", weak, measured_r, measured_r <= weak + regret.AUDIT_TOL),
    ]
    strong_floor_factor = regret.BoundFactor(
        regret.BoundKind.STRONG, d, floor_t1, prof_floor.alpha
    )
    cumulative = regret.cumulative_bound(total, strong_floor_factor, prof_floor.base_regret)
    checks.append(
        BoundCheck(
            "cumulative",
            cumulative,
            measured_cumulative,
            measured_cumulative <= cumulative + regret.AUDIT_TOL,
        )
    )
    if horizon_mode == "unknown":
        unknown = regret.unknown_horizon_bound(
            total, strong_floor_factor, prof_floor.base_regret
        )
        checks.append(
            BoundCheck(
                "unknown-horizon-average",
                unknown,
                measured_r,
                measured_r <= unknown + regret.AUDIT_TOL,
            )
        )

    report = _build_report(
        logs,
        entry,
        req.oracle_resolution,
        force_grid_oracle=req.conditional_oracle == "grid",
        bound_checks=checks,
    )

    decomposition = None
    if d >= 2 and single_full_log:
        if not 1 <= req.split < d:
            raise ConfigError(f"split must be in [1, {d - 1}] for dimension {d}")
        oracle = benchmarks.conditional_oracle(
            entry,
            objective,
            req.oracle_resolution,
            force_grid=req.conditional_oracle == "grid",
        )
        dec = regret.audit_decomposition(logs[0], oracle, f_star, f_err, req.split)
        decomposition = DecompositionModel(**dec.to_dict())

    trend = None
    if req.include_trend:
        tr = regret.regret_trend(objective, kind, req.trend_budgets, f_star)
        trend = TrendModel(
            budgets=list(tr.budgets),
            average_regret=list(tr.average_regret),
            nonincreasing=tr.nonincreasing,
        )

    return AuditResponse(
        objective=entry.name,
        dimension=d,
        budgets=list(logs[0].budgets) if single_full_log else [],
        total_evaluations=total,
        report=report,
        decomposition=decomposition,
        robustness=RobustnessModel(
            horizon=prof_t1.horizon,
            epsilon=prof_t1.epsilon,
            alpha=prof_t1.alpha,
            beta=prof_t1.beta,
            base_regret=prof_t1.base_regret,
            degenerate=prof_t1.degenerate,
        ),
        trend=trend,
    )


def handle_sweep(req: SweepRequest) -> SweepResponse:
    entry = benchmarks.get_entry(req.objective)
    objective = entry.objective
    d = objective.dimension
    kind = OptimizerKind(req.optimizer)
    f_star, _, _ = benchmarks.entry_f_star(entry, req.oracle_resolution)
    marginal = _marginal_objective(entry, req.oracle_resolution)
    rows = []
    for total in sorted(req.t_values):
        if total < 1:
            raise ConfigError(f"sweep budgets must be positive, got {total}")
        schedule = BudgetSchedule.with_default_noise(split_budget(total, d))
        result = run(objective, schedule, kind)
        values = result.log.values()
        r = regret.average_regret(values, f_star)
        t1 = schedule.budgets[0]
        prof = measure_robustness(kind, marginal, req.robustness_epsilon, [t1])[0]
        rows.append(
            SweepRowModel(
                T=total,
                budgets=list(schedule.budgets),
                r=r,
                r_tilde=r,
                R=len(values) * r,
                bound_strong=regret.strong_bound(d, prof.alpha, prof.base_regret),
                bound_weak=regret.weak_bound(d, prof.beta, prof.base_regret),
            )
        )
    return SweepResponse(objective=entry.name, rows=rows)
