"""Shared domain types for black-box minimization on the unit cube.

Everything here is a plain value: objectives, budget schedules, evaluation
logs, regret reports.  All types are immutable after construction except
:class:`MetaState`, which is owned and mutated by a single engine run.  Values
can therefore be handed between threads freely.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Point = tuple[float, ...]

#: Hard cap on brute-force grid sizes (points, not pairs).
MAX_GRID_POINTS = 10_000_000

#: Slack used when comparing function gaps against Lipschitz allowances.
REGULARITY_TOL = 1e-12


class GridSizeError(ValueError):
    """A requested grid sweep would exceed ``MAX_GRID_POINTS``."""


class UnknownObjectiveError(KeyError):
    """No catalog entry with the requested name."""


class NonFiniteEvaluationError(RuntimeError):
    """An objective returned nan/inf mid-run.

    Carries the aborted step as ``record`` so callers can emit a diagnostic.
    """

    def __init__(self, record: "EvalRecord"):
        super().__init__(
            f"objective returned non-finite value {record.value!r} at "
            f"point {record.point} (t={record.t})"
        )
        self.record = record


class Norm(str, enum.Enum):
    """Norm that induces the metric of the regularity condition."""

    INFINITY = "infinity"
    EUCLIDEAN = "euclidean"
    ONE = "one"

    def distance(self, x: Sequence[float], y: Sequence[float]) -> float:
        if self is Norm.INFINITY:
            return max(abs(a - b) for a, b in zip(x, y))
        if self is Norm.ONE:
            return sum(abs(a - b) for a, b in zip(x, y))
        return math.dist(x, y)

    def half_cell_diagonal(self, n_axes: int, spacing: float) -> float:
        """Distance from a cell center to its corner, in this norm."""
        half = 0.5 * spacing
        if self is Norm.INFINITY:
            return half
        if self is Norm.ONE:
            return n_axes * half
        return math.sqrt(n_axes) * half


@dataclass(frozen=True)
class ObjectiveSpec:
    """A deterministic function ``f: [0,1]^d -> R`` with its regularity data.

    ``evaluate`` must be deterministic (same point, bit-identical value) and
    is expected to satisfy ``|f(x) - f(y)| <= L * d(x, y)`` for the declared
    norm; :func:`validate_regularity` checks this on a grid, as a lint, not a
    runtime guard.
    """

    dimension: int
    evaluate: Callable[[Point], float]
    lipschitz_constant: float
    norm_kind: Norm = Norm.INFINITY
    known_minimum: float | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.lipschitz_constant < 0:
            raise ValueError("lipschitz_constant must be nonnegative")


@dataclass(frozen=True)
class RegularityViolation:
    x: Point
    y: Point
    gap: float
    allowed: float


def _grid_axis(resolution: int) -> np.ndarray:
    # Endpoint grid: `resolution` points with spacing 1/(resolution-1).
    return np.linspace(0.0, 1.0, resolution)


def _pair_scan(
    coords: np.ndarray, values: np.ndarray, lipschitz: float, norm: Norm
) -> list[RegularityViolation]:
    n, d = coords.shape
    out: list[RegularityViolation] = []
    chunk = max(1, int(2_000_000 // max(n, 1)))
    col_idx = np.arange(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        rows = slice(start, stop)
        if norm is Norm.INFINITY:
            dist = np.abs(coords[rows, 0:1] - coords[None, :, 0])
            for k in range(1, d):
                np.maximum(dist, np.abs(coords[rows, k : k + 1] - coords[None, :, k]), out=dist)
        elif norm is Norm.ONE:
            dist = np.abs(coords[rows, 0:1] - coords[None, :, 0])
            for k in range(1, d):
                dist += np.abs(coords[rows, k : k + 1] - coords[None, :, k])
        else:
            dist = (coords[rows, 0:1] - coords[None, :, 0]) ** 2
            for k in range(1, d):
                dist += (coords[rows, k : k + 1] - coords[None, :, k]) ** 2
            np.sqrt(dist, out=dist)
        gap = np.abs(values[rows, None] - values[None, :])
        mask = gap > lipschitz * dist + REGULARITY_TOL
        mask &= col_idx[None, :] > np.arange(start, stop)[:, None]
        for i_loc, j in np.argwhere(mask):
            i = start + int(i_loc)
            out.append(
                RegularityViolation(
                    x=tuple(coords[i]),
                    y=tuple(coords[int(j)]),
                    gap=float(gap[i_loc, j]),
                    allowed=float(lipschitz * dist[i_loc, j]),
                )
            )
    return out


def _adjacency_clean(
    grid_values: np.ndarray, lipschitz: float, spacing: float, norm: Norm
) -> bool:
    """Fast soundness check for the sup and one norms.

    Any grid pair decomposes into unit steps (king moves for the sup norm,
    axis moves for the one norm) whose per-step allowances add up to exactly
    ``L * d(x, y)``, so a violation-free adjacency scan implies a
    violation-free full scan up to ``(steps-1) * REGULARITY_TOL`` of slack.
    """
    d = grid_values.ndim
    if norm is Norm.ONE:
        offsets = [tuple(1 if k == a else 0 for k in range(d)) for a in range(d)]
    else:
        # one representative of each {delta, -delta} king-move pair
        offsets = []
        for off in np.ndindex(*(3,) * d):
            delta = tuple(o - 1 for o in off)
            if any(delta) and delta > (0,) * d:
                offsets.append(delta)
    allowance = lipschitz * spacing + REGULARITY_TOL
    for delta in offsets:
        src = tuple(
            slice(None, -o) if o > 0 else slice(-o, None) if o < 0 else slice(None)
            for o in delta
        )
        dst = tuple(
            slice(o, None) if o > 0 else slice(None, o) if o < 0 else slice(None)
            for o in delta
        )
        if np.any(np.abs(grid_values[src] - grid_values[dst]) > allowance):
            return False
    return True


def validate_regularity(
    objective: ObjectiveSpec, resolution: int
) -> list[RegularityViolation]:
    """Scan an endpoint grid for pairs violating the Lipschitz condition.

    Returns every grid pair ``(x, y)`` with
    ``|f(x) - f(y)| > L * d(x, y) + 1e-12``.  An empty list means the check
    passes on the grid (advisory only; a black box cannot be verified
    exhaustively).  Grid spacing is ``1/(resolution-1)`` per axis.

    For the sup and one norms a large clean grid is certified by an exact
    adjacency argument without materializing all pairs; the full pair scan
    runs only when needed to enumerate violations.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    d = objective.dimension
    total = resolution**d
    if total > MAX_GRID_POINTS:
        raise GridSizeError(
            f"grid of {resolution}^{d} = {total} points exceeds the "
            f"{MAX_GRID_POINTS} point limit"
        )
    axis = _grid_axis(resolution)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    values = np.array([objective.evaluate(tuple(p)) for p in coords])
    spacing = 1.0 / (resolution - 1)
    if total > 5000 and objective.norm_kind is not Norm.EUCLIDEAN:
        if _adjacency_clean(
            values.reshape((resolution,) * d),
            objective.lipschitz_constant,
            spacing,
            objective.norm_kind,
        ):
            return []
    return _pair_scan(coords, values, objective.lipschitz_constant, objective.norm_kind)


@dataclass(frozen=True)
class BudgetSchedule:
    """Per-dimension query budgets ``T_1 <= ... <= T_d`` and noise bounds.

    ``noise_bounds`` are carried as data for the inner optimizers and audits;
    they never alter the query sequence.  ``math.inf`` marks an unknown bound.
    """

    budgets: tuple[int, ...]
    noise_bounds: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.budgets:
            raise ValueError("budgets must be nonempty")
        if any(b < 1 for b in self.budgets):
            raise ValueError(f"budgets must be positive, got {self.budgets}")
        if any(a > b for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError(f"budgets must be nondecreasing, got {self.budgets}")
        if len(self.noise_bounds) != len(self.budgets):
            raise ValueError("noise_bounds length must match budgets length")
        if any(e < 0 for e in self.noise_bounds):
            raise ValueError("noise bounds must be nonnegative")

    @classmethod
    def with_default_noise(cls, budgets: Sequence[int]) -> "BudgetSchedule":
        """Default bounds: exact evaluations innermost, unknown elsewhere."""
        budgets = tuple(int(b) for b in budgets)
        noise = tuple(math.inf if i < len(budgets) - 1 else 0.0 for i in range(len(budgets)))
        return cls(budgets=budgets, noise_bounds=noise)

    @property
    def dimension(self) -> int:
        return len(self.budgets)

    def total(self) -> int:
        return math.prod(self.budgets)


@dataclass(slots=True)
class MetaState:
    """Mutable per-run state: counters, per-dimension histories, h-tables.

    ``histories[i]`` holds the current block's queries for dimension ``i+1``
    and ``cond_min[i]`` the running minimum evaluation observed while each
    query was the active dimension-(i+1) coordinate, aligned by query index.
    A dimension reset discards both lists and starts a fresh block.
    """

    counters: list[int]
    histories: list[list[float]]
    cond_min: list[list[float]]
    steps_done: int = 0

    @classmethod
    def initial(cls, dimension: int) -> "MetaState":
        return cls(
            counters=[1] * dimension,
            histories=[[] for _ in range(dimension)],
            cond_min=[[] for _ in range(dimension)],
        )

    @property
    def dimension(self) -> int:
        return len(self.counters)

    @property
    def started(self) -> bool:
        return bool(self.histories[0])

    def table(self, dim: int) -> dict[float, float]:
        """Current h-table of 1-indexed dimension ``dim``, keyed by query.

        Re-queried points collapse onto the smaller of their tracked minima.
        """
        out: dict[float, float] = {}
        for x, v in zip(self.histories[dim - 1], self.cond_min[dim - 1]):
            out[x] = min(v, out.get(x, math.inf))
        return out


@dataclass(frozen=True, slots=True)
class EvalRecord:
    """One evaluation: time index, counters at that time, point, value."""

    t: int
    counters: tuple[int, ...]
    point: Point
    value: float


def _g17(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class EvaluationLog:
    """Ordered evaluation records of one run, with the budgets that drove it."""

    budgets: tuple[int, ...]
    records: tuple[EvalRecord, ...]

    @property
    def dimension(self) -> int:
        return len(self.budgets)

    def values(self) -> list[float]:
        return [r.value for r in self.records]

    def to_csv(self) -> str:
        d = self.dimension
        header = (
            "t,"
            + ",".join(f"tau_{i}" for i in range(1, d + 1))
            + ","
            + ",".join(f"x_{i}" for i in range(1, d + 1))
            + ",f"
        )
        lines = [header]
        for r in self.records:
            lines.append(
                f"{r.t},"
                + ",".join(str(c) for c in r.counters)
                + ","
                + ",".join(_g17(x) for x in r.point)
                + ","
                + _g17(r.value)
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        items = []
        for r in self.records:
            tau = ", ".join(str(c) for c in r.counters)
            xs = ", ".join(_g17(x) for x in r.point)
            items.append(
                f'  {{"t": {r.t}, "tau": [{tau}], "x": [{xs}], "f": {_g17(r.value)}}}'
            )
        return "[\n" + ",\n".join(items) + "\n]\n"

    @classmethod
    def from_records(
        cls,
        records: Sequence[tuple[int, Sequence[int], Sequence[float], float]],
        budgets: Sequence[int] | None = None,
    ) -> "EvaluationLog":
        recs = tuple(
            EvalRecord(
                t=int(t),
                counters=tuple(int(c) for c in tau),
                point=tuple(float(v) for v in x),
                value=float(f),
            )
            for t, tau, x, f in records
        )
        if not recs:
            raise ValueError("cannot build a log from zero records")
        if budgets is None:
            d = len(recs[0].counters)
            budgets = tuple(max(r.counters[i] for r in recs) for i in range(d))
        return cls(budgets=tuple(int(b) for b in budgets), records=recs)


@dataclass(frozen=True)
class RobustnessProfile:
    """Measured noise-sensitivity of a 1D optimizer at one horizon.

    ``alpha`` bounds the regret increase per unit of nonnegative bounded
    noise, ``beta`` the pseudo-regret increase; ``base_regret`` is the
    noiseless average regret.  ``degenerate`` marks the undefined case
    (measurement noise level was zero), reported with the neutral
    coefficients alpha=0, beta=1.
    """

    horizon: int
    alpha: float
    beta: float
    base_regret: float
    epsilon: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")

    def induced_weak_beta(self) -> float:
        """A strongly robust profile implies a weak one with beta = alpha + 1."""
        return self.alpha + 1.0


@dataclass(frozen=True)
class BoundCheck:
    name: str
    bound: float
    measured: float
    satisfied: bool


@dataclass(frozen=True)
class RegretReport:
    """Regret quantities of a run plus any bound comparisons performed."""

    average_regret: float
    average_pseudo_regret: float
    cumulative_regret: float
    noise_gap: float | None
    f_star: float
    f_star_error: float
    f_star_source: str
    total_evaluations: int
    bound_checks: tuple[BoundCheck, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "average_regret": self.average_regret,
            "average_pseudo_regret": self.average_pseudo_regret,
            "cumulative_regret": self.cumulative_regret,
            "noise_gap": self.noise_gap,
            "f_star": self.f_star,
            "f_star_error": self.f_star_error,
            "f_star_source": self.f_star_source,
            "total_evaluations": self.total_evaluations,
            "bound_checks": [
                {
                    "name": c.name,
                    "bound": c.bound,
                    "measured": c.measured,
                    "satisfied": c.satisfied,
                }
                for c in self.bound_checks
            ],
        }
