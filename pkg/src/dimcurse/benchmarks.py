"""Benchmark objectives with known minima, plus brute-force grid oracles.

The catalog functions are simple regular shapes whose Lipschitz constants and
minima are known (or frozen from the oracle at a committed resolution), so
they double as ground truth for the regret audits.  The oracles minimize over
cell-center grids, giving the uniform guarantee
``best_center - L * half_cell_diagonal <= true_min <= best_center``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .types import (
    GridSizeError,
    MAX_GRID_POINTS,
    Norm,
    ObjectiveSpec,
    Point,
    UnknownObjectiveError,
)

#: Environment variable naming the JSON sidecar for cached oracle results.
ORACLE_CACHE_ENV = "DIMCURSE_ORACLE_CACHE"

#: Minimum of the ripple objective, frozen from
#: grid_minimum(ripple, resolution=2**16), with that oracle's error bound.
RIPPLE_GRID_MINIMUM = 3.8152717522083046e-06
RIPPLE_GRID_MINIMUM_ERROR = 1.5798922170981572e-05

#: Error bounds of frozen (non-analytic) catalog minima, by entry name.
FROZEN_F_STAR_ERRORS = {"ripple": RIPPLE_GRID_MINIMUM_ERROR}


@dataclass(frozen=True)
class OracleResult:
    value: float
    error_bound: float
    resolution: int


@dataclass(frozen=True)
class CatalogEntry:
    """A named objective plus whatever exact side information it admits.

    ``conditional_min`` maps a prefix of leading coordinates to the exact
    minimum of the objective over the remaining ones; ``marginal`` is that
    same map for a length-1 prefix packaged as a 1D objective (what the
    outermost optimizer effectively sees).  Both are None when no closed form
    is available and the grid oracle must stand in.
    """

    name: str
    objective: ObjectiveSpec
    analytic_minimum: float | None
    analytic_argmin: Point | None
    conditional_min: Callable[[Point], float] | None
    marginal: ObjectiveSpec | None
    notes: str


def vee(center: float = 0.5) -> ObjectiveSpec:
    """f(x) = |x - center|; Lipschitz-1, minimum 0."""
    return ObjectiveSpec(
        dimension=1,
        evaluate=lambda p: abs(p[0] - center),
        lipschitz_constant=1.0,
        norm_kind=Norm.INFINITY,
        known_minimum=0.0,
    )


RIPPLE_LIPSCHITZ = 0.5 + 0.5 * math.pi  # max |f'| of the ripple objective


def ripple() -> ObjectiveSpec:
    """f(x) = 0.5*|x - 0.5| + 0.25*(1 - cos(4 pi x))/2.

    The minimum is not treated as analytic; it is frozen from the grid oracle
    at resolution 2**16 (see RIPPLE_GRID_MINIMUM).
    """
    return ObjectiveSpec(
        dimension=1,
        evaluate=lambda p: 0.5 * abs(p[0] - 0.5) + 0.125 * (1.0 - math.cos(4.0 * math.pi * p[0])),
        lipschitz_constant=RIPPLE_LIPSCHITZ,
        norm_kind=Norm.INFINITY,
        known_minimum=RIPPLE_GRID_MINIMUM,
    )


def pyramid(centers: Sequence[float]) -> ObjectiveSpec:
    """f(x) = max_i |x_i - c_i|; Lipschitz-1 in the sup norm, minimum 0."""
    cs = tuple(float(c) for c in centers)
    return ObjectiveSpec(
        dimension=len(cs),
        evaluate=lambda p: max(abs(a - c) for a, c in zip(p, cs)),
        lipschitz_constant=1.0,
        norm_kind=Norm.INFINITY,
        known_minimum=0.0,
    )


def cone(centers: Sequence[float]) -> ObjectiveSpec:
    """f(x) = sum_i |x_i - c_i|; Lipschitz-d in the sup norm, minimum 0."""
    cs = tuple(float(c) for c in centers)
    return ObjectiveSpec(
        dimension=len(cs),
        evaluate=lambda p: sum(abs(a - c) for a, c in zip(p, cs)),
        lipschitz_constant=float(len(cs)),
        norm_kind=Norm.INFINITY,
        known_minimum=0.0,
    )


def _pyramid_entry(name: str, centers: tuple[float, ...]) -> CatalogEntry:
    def cond(prefix: Point) -> float:
        # free coordinates can sit exactly on their centers
        return max((abs(a - c) for a, c in zip(prefix, centers)), default=0.0)

    return CatalogEntry(
        name=name,
        objective=pyramid(centers),
        analytic_minimum=0.0,
        analytic_argmin=centers,
        conditional_min=cond,
        marginal=vee(centers[0]),
        notes=f"max_i |x_i - c_i| with centers {centers}",
    )


def _cone_entry(name: str, centers: tuple[float, ...]) -> CatalogEntry:
    def cond(prefix: Point) -> float:
        return sum(abs(a - c) for a, c in zip(prefix, centers))

    return CatalogEntry(
        name=name,
        objective=cone(centers),
        analytic_minimum=0.0,
        analytic_argmin=centers,
        conditional_min=cond,
        marginal=vee(centers[0]),
        notes=f"sum_i |x_i - c_i| with centers {centers}",
    )


def catalog() -> tuple[CatalogEntry, ...]:
    """The built-in objectives, all validated Lipschitz-regular on [0,1]^d."""
    return (
        CatalogEntry(
            name="vee",
            objective=vee(0.5),
            analytic_minimum=0.0,
            analytic_argmin=(0.5,),
            conditional_min=None,
            marginal=None,
            notes="|x - 0.5|",
        ),
        CatalogEntry(
            name="ripple",
            objective=ripple(),
            analytic_minimum=None,
            analytic_argmin=None,
            conditional_min=None,
            marginal=None,
            notes=(
                "0.5*|x-0.5| + 0.25*(1-cos(4 pi x))/2; minimum frozen from the "
                "grid oracle at resolution 2**16"
            ),
        ),
        _pyramid_entry("pyramid_2", (0.3, 0.7)),
        _pyramid_entry("pyramid_3", (0.3, 0.7, 0.4)),
        _cone_entry("cone_2", (0.25, 0.75)),
        _cone_entry("cone_3", (0.25, 0.75, 0.5)),
    )


def get_entry(name: str) -> CatalogEntry:
    for entry in catalog():
        if entry.name == name:
            return entry
    raise UnknownObjectiveError(name)


def _axis_centers(resolution: int, nested: bool) -> np.ndarray:
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if not nested:
        return (np.arange(resolution) + 0.5) / resolution
    # union of all coarser power-of-two center grids: nested under doubling
    if resolution & (resolution - 1):
        raise ValueError("nested grids need a power-of-two resolution")
    parts = []
    m = 1
    while m <= resolution:
        parts.append((np.arange(m) + 0.5) / m)
        m *= 2
    return np.unique(np.concatenate(parts))


def _free_axes_error(objective: ObjectiveSpec, n_free: int, resolution: int) -> float:
    spacing = 1.0 / resolution
    return objective.lipschitz_constant * objective.norm_kind.half_cell_diagonal(
        n_free, spacing
    )


def grid_minimum(
    objective: ObjectiveSpec, resolution: int, nested: bool = False
) -> OracleResult:
    """Minimum of f over the cell-center grid, with its Lipschitz error bound.

    Every domain point lies within half a cell diagonal of some center, so
    ``value - error_bound <= f_star <= value``.  With ``nested=True`` the grid
    is the union of all power-of-two center grids up to ``resolution``, which
    makes refinement by doubling monotone (plain center grids at successive
    powers of two are not nested).
    """
    return conditional_minimum(objective, (), resolution, nested=nested)


def conditional_minimum(
    objective: ObjectiveSpec,
    prefix: Sequence[float],
    resolution: int,
    nested: bool = False,
) -> OracleResult:
    """Grid minimum over the free coordinates with the leading ones pinned."""
    prefix = tuple(float(v) for v in prefix)
    n_free = objective.dimension - len(prefix)
    if n_free < 0:
        raise ValueError("prefix longer than the objective dimension")
    if n_free == 0:
        return OracleResult(
            value=objective.evaluate(prefix), error_bound=0.0, resolution=resolution
        )
    axis = _axis_centers(resolution, nested)
    if len(axis) ** n_free > MAX_GRID_POINTS:
        raise GridSizeError(
            f"conditional grid of {len(axis)}^{n_free} points exceeds the "
            f"{MAX_GRID_POINTS} point limit"
        )
    evaluate = objective.evaluate
    best = math.inf
    for free in itertools.product(axis.tolist(), repeat=n_free):
        v = evaluate(prefix + free)
        if v < best:
            best = v
    return OracleResult(
        value=best,
        error_bound=_free_axes_error(objective, n_free, resolution),
        resolution=resolution,
    )


# ---------------------------------------------------------------------------
# f_star resolution and the optional oracle cache


def _cache_path() -> str | None:
    return os.environ.get(ORACLE_CACHE_ENV) or None


def _cache_load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return {}


def _cache_store(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)


def cached_grid_minimum(
    name: str, objective: ObjectiveSpec, resolution: int
) -> OracleResult:
    """grid_minimum with a JSON sidecar keyed by (name, resolution)."""
    path = _cache_path()
    key = str(resolution)
    if path:
        cache = _cache_load(path)
        hit = cache.get(name, {}).get(key)
        if hit is not None:
            return OracleResult(
                value=float(hit["value"]),
                error_bound=float(hit["error_bound"]),
                resolution=resolution,
            )
    result = grid_minimum(objective, resolution)
    if path:
        cache = _cache_load(path)
        cache.setdefault(name, {})[key] = {
            "value": result.value,
            "error_bound": result.error_bound,
        }
        _cache_store(path, cache)
    return result


def resolve_f_star(
    objective: ObjectiveSpec, resolution: int, name: str | None = None
) -> tuple[float, float, str]:
    """Best available f_star: (value, error bound, source).

    Uses the objective's known minimum when present, else the grid oracle at
    the given resolution (cached when a sidecar is configured and the
    objective is named).
    """
    if objective.known_minimum is not None:
        return objective.known_minimum, 0.0, "known"
    if name is not None:
        result = cached_grid_minimum(name, objective, resolution)
    else:
        result = grid_minimum(objective, resolution)
    return result.value, result.error_bound, f"grid[{resolution}]"


def entry_f_star(entry: CatalogEntry, resolution: int) -> tuple[float, float, str]:
    """f_star for a catalog entry: analytic, frozen, or freshly gridded."""
    if entry.analytic_minimum is not None:
        return entry.analytic_minimum, 0.0, "analytic"
    if entry.objective.known_minimum is not None:
        return (
            entry.objective.known_minimum,
            FROZEN_F_STAR_ERRORS.get(entry.name, 0.0),
            "frozen-grid",
        )
    result = cached_grid_minimum(entry.name, entry.objective, resolution)
    return result.value, result.error_bound, f"grid[{resolution}]"


def conditional_oracle(
    entry: CatalogEntry | None,
    objective: ObjectiveSpec,
    resolution: int,
    force_grid: bool = False,
) -> Callable[[Point], tuple[float, float]]:
    """Prefix -> (conditional minimum, error bound), exact when available."""
    if entry is not None and entry.conditional_min is not None and not force_grid:
        exact = entry.conditional_min
        return lambda prefix: (exact(prefix), 0.0)

    def via_grid(prefix: Point) -> tuple[float, float]:
        res = conditional_minimum(objective, prefix, resolution)
        return res.value, res.error_bound

    return via_grid
