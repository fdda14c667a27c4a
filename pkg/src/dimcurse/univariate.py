"""Univariate global optimizers over [0, 1] behind a common proposal contract.

Two implementations ship:

* ``piyavskii_shubert`` — queries the endpoints first, then the minimizer of
  the piecewise-linear lower envelope ``F(x) = max_i (v_i - L * |x - x_i|)``
  built from all observations so far;
* ``uniform_grid`` — the history-free cell-center sweep ``x_t = (2t-1)/(2T)``.

Proposals are pure functions of (config, history, step index); a noise bound
is carried in the config for bookkeeping but never changes a proposal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .types import ObjectiveSpec, RobustnessProfile


class OptimizerKind(str, enum.Enum):
    PIYAVSKII_SHUBERT = "ps"
    UNIFORM_GRID = "grid"


@dataclass(frozen=True)
class OptimizerConfig:
    kind: OptimizerKind
    horizon: int
    lipschitz_constant: float
    noise_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.lipschitz_constant <= 0:
            raise ValueError("lipschitz_constant must be positive")
        if self.noise_bound < 0:
            raise ValueError("noise_bound must be nonnegative")


@dataclass(frozen=True)
class UnivariateHistory:
    """Past queries with their (possibly noise-inflated) observed values."""

    queries: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.queries) != len(self.values):
            raise ValueError("queries and values must have equal length")
        if any(not 0.0 <= q <= 1.0 for q in self.queries):
            raise ValueError("queries must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.queries)

    def extended(self, query: float, value: float) -> "UnivariateHistory":
        return UnivariateHistory(self.queries + (query,), self.values + (value,))


def envelope_value(
    history: UnivariateHistory, lipschitz: float, x: float | np.ndarray
) -> float | np.ndarray:
    """Lower envelope F(x) = max_i (v_i - L * |x - x_i|)."""
    if len(history) == 0:
        raise ValueError("envelope is undefined for an empty history")
    qs = np.asarray(history.queries)
    vs = np.asarray(history.values)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    cones = vs[None, :] - lipschitz * np.abs(xs[:, None] - qs[None, :])
    out = cones.max(axis=1)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def _envelope_min_xy(
    queries: Sequence[float], values: Sequence[float], lipschitz: float
) -> tuple[float, float]:
    order = sorted(range(len(queries)), key=lambda i: (queries[i], values[i]))
    qs = [queries[i] for i in order]
    vs = [values[i] for i in order]
    candidates = [0.0, 1.0]
    for (xi, vi), (xj, vj) in zip(zip(qs, vs), zip(qs[1:], vs[1:])):
        if xi == xj:
            continue
        x_star = (vi - vj) / (2.0 * lipschitz) + 0.5 * (xi + xj)
        candidates.append(min(max(x_star, xi), xj))
    xs = np.array(sorted(candidates))
    cones = np.asarray(vs)[None, :] - lipschitz * np.abs(xs[:, None] - np.asarray(qs)[None, :])
    fs = cones.max(axis=1)
    best = int(np.argmin(fs))  # first occurrence: smallest x on ties
    return float(xs[best]), float(fs[best])


def envelope_min(history: UnivariateHistory, lipschitz: float) -> tuple[float, float]:
    """Global minimizer of the lower envelope over [0, 1] and its value.

    Candidates are the domain endpoints plus, for every consecutive pair of
    sorted queries x_i < x_j, the cone intersection
    ``(v_i - v_j) / (2L) + (x_i + x_j) / 2`` clamped into [x_i, x_j]; the
    envelope is evaluated exactly at each candidate and ties go to the
    smallest x.
    """
    if lipschitz <= 0:
        raise ValueError("lipschitz constant must be positive")
    if len(history) < 2:
        raise ValueError("envelope minimization needs at least two queries")
    if len(set(history.queries)) < 2:
        raise ValueError("envelope minimization needs two distinct queries")
    return _envelope_min_xy(history.queries, history.values, lipschitz)


def propose_trusted(
    config: OptimizerConfig, queries: Sequence[float], values: Sequence[float], t: int
) -> float:
    """Proposal rule on pre-validated inputs; the engine's hot path."""
    if config.kind is OptimizerKind.UNIFORM_GRID:
        return (2 * t - 1) / (2 * config.horizon)
    if t == 1:
        return 0.0
    if t == 2:
        return 1.0
    x_star, _ = _envelope_min_xy(queries, values, config.lipschitz_constant)
    return x_star


def propose(config: OptimizerConfig, history: UnivariateHistory, t: int) -> float:
    """Next query of the configured optimizer at step ``t`` (1-indexed)."""
    if t != len(history) + 1:
        raise ValueError(
            f"step index {t} inconsistent with history of length {len(history)}"
        )
    if t > config.horizon:
        raise ValueError(f"step index {t} exceeds horizon {config.horizon}")
    if config.kind is OptimizerKind.PIYAVSKII_SHUBERT and t >= 3:
        if len(set(history.queries)) < 2:
            raise ValueError("envelope minimization needs two distinct queries")
    return propose_trusted(config, history.queries, history.values, t)


def envelope_curve(
    history: UnivariateHistory, lipschitz: float, n_points: int = 1025
) -> list[tuple[float, float]]:
    xs = np.linspace(0.0, 1.0, n_points)
    fs = envelope_value(history, lipschitz, xs)
    return [(float(x), float(f)) for x, f in zip(xs, fs)]


def write_envelope_csv(path, history: UnivariateHistory, lipschitz: float, n_points: int = 1025) -> None:
    with open(path, "w") as fh:
        fh.write("x,F(x)\n")
        for x, f in envelope_curve(history, lipschitz, n_points):
            fh.write(f"{format(x, '.17g')},{format(f, '.17g')}\n")


# ---------------------------------------------------------------------------
# Robustness measurement

NoiseFn = Callable[[int, int], float]


def constant_noise(eps: float) -> NoiseFn:
    return lambda t, T: eps


def alternating_noise(eps: float) -> NoiseFn:
    # {0, eps, 0, eps, ...}
    return lambda t, T: eps if t % 2 == 0 else 0.0


def front_loaded_noise(eps: float) -> NoiseFn:
    return lambda t, T: eps if t <= T // 2 else 0.0


def adversarial_noise_set(eps: float) -> dict[str, NoiseFn]:
    """The fixed measurement set: constant, alternating, front-loaded."""
    return {
        "constant": constant_noise(eps),
        "alternating": alternating_noise(eps),
        "front_loaded": front_loaded_noise(eps),
    }


def run_univariate(
    kind: OptimizerKind,
    objective: ObjectiveSpec,
    horizon: int,
    noise: NoiseFn | None = None,
) -> tuple[list[float], list[float], list[float]]:
    """Drive a 1D optimizer on an objective, optionally inflating observations.

    Returns (queries, true values, observed values).  Noise feeds only the
    optimizer's history; regret is always judged on true values.
    """
    if objective.dimension != 1:
        raise ValueError("run_univariate needs a 1D objective")
    config = OptimizerConfig(
        kind=kind, horizon=horizon, lipschitz_constant=objective.lipschitz_constant
    )
    queries: list[float] = []
    true_vals: list[float] = []
    observed: list[float] = []
    for t in range(1, horizon + 1):
        x = propose_trusted(config, queries, observed, t)
        f = objective.evaluate((x,))
        queries.append(x)
        true_vals.append(f)
        observed.append(f if noise is None else f + noise(t, horizon))
    return queries, true_vals, observed


def measure_robustness(
    kind: OptimizerKind,
    objective: ObjectiveSpec,
    epsilon: float,
    horizons: Sequence[int],
    extra_profiles: dict[str, NoiseFn] | None = None,
) -> list[RobustnessProfile]:
    """Empirical noise-sensitivity coefficients at each horizon.

    alpha = max over the adversarial noise set of (r_T(eps) - r_T(0)) / eps,
    beta the same with the pseudo-regret in place of the regret; both are
    clamped into their admissible ranges (alpha >= 0, beta >= 1).  A zero
    epsilon leaves both undefined and yields a degenerate neutral profile.
    """
    if objective.known_minimum is None:
        raise ValueError("robustness measurement needs an objective with known minimum")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    f_star = objective.known_minimum
    profiles: list[RobustnessProfile] = []
    for horizon in horizons:
        _, base_true, _ = run_univariate(kind, objective, horizon)
        base_regret = sum(base_true) / horizon - f_star
        if epsilon == 0.0:
            profiles.append(
                RobustnessProfile(
                    horizon=horizon,
                    alpha=0.0,
                    beta=1.0,
                    base_regret=base_regret,
                    epsilon=0.0,
                    degenerate=True,
                )
            )
            continue
        noise_set = adversarial_noise_set(epsilon)
        if extra_profiles:
            noise_set.update(extra_profiles)
        worst_alpha = -math.inf
        worst_beta = -math.inf
        for noise in noise_set.values():
            _, true_vals, observed = run_univariate(kind, objective, horizon, noise)
            regret = sum(true_vals) / horizon - f_star
            pseudo = sum(observed) / horizon - f_star
            worst_alpha = max(worst_alpha, (regret - base_regret) / epsilon)
            worst_beta = max(worst_beta, (pseudo - base_regret) / epsilon)
        profiles.append(
            RobustnessProfile(
                horizon=horizon,
                alpha=max(0.0, worst_alpha),
                beta=max(1.0, worst_beta),
                base_regret=base_regret,
                epsilon=epsilon,
            )
        )
    return profiles
