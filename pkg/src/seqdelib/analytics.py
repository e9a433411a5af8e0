# src/seqdelib/analytics.py
"""
Social cost, distortion and the closed-form stationary analysis.

Distortion of an alternative a is SC(a) / SC(a*), where SC sums the distances
from every agent's bliss point and a* minimises it over the space. When
SC(a*) is zero the distortion is 1 for any other zero-cost alternative and
infinite otherwise.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from seqdelib.errors import DegenerateReportError, DomainError, InputError
from seqdelib.population import Agent, bliss_array
from seqdelib.spaces import (
    TOLERANCE,
    Alternative,
    DecisionSpace,
    SpaceKind,
    point_distance_matrix,
    require_member,
)

logger = logging.getLogger(__name__)

# -------------------------------
# Known bounds
# -------------------------------

PAIRWISE_LOWER_BOUND = 1.125  # any scheme that only looks at two agents
STATIONARY_UPPER_BOUND = 1.208  # deliberation, median graphs, T -> infinity
ONE_SHOT_MEDIAN_LOWER_BOUND = 1.316  # median of three random bliss points
SHORTEST_PATH_LOWER_BOUND = 9 / 8
DICTATORSHIP_BOUND = 2.0  # random dictatorship, any metric
GENERAL_METRIC_BOUND = 3.0  # deliberation on a general metric

STEP_COLUMNS = ["step", "mean", "q1", "q3"]
DISTORTION_COLUMNS = ["run", "step", "distortion"]


# -------------------------------
# Social cost and distortion
# -------------------------------


def social_costs(space: DecisionSpace, population: Sequence[Agent] | np.ndarray) -> np.ndarray:
    """SC(a) for every alternative, indexed by id.

    ``population`` may also be a bliss array as returned by ``bliss_array``.
    """
    points = population if isinstance(population, np.ndarray) else bliss_array(population)
    if points.size == 0:
        raise InputError("population is empty")
    if space.kind is SpaceKind.LINE and points.dtype.kind == "f":
        return point_distance_matrix(space, points).sum(axis=0)
    counts = np.bincount(points.astype(int), minlength=space.size)
    if counts.size != space.size:
        raise InputError("alternative id outside the space")
    return counts @ space.distance_matrix


def social_cost(space: DecisionSpace, population: Sequence[Agent], a: Alternative) -> float:
    require_member(space, a)
    return float(social_costs(space, population)[a.id])


def optimal_alternative(
    space: DecisionSpace, population: Sequence[Agent]
) -> Tuple[Alternative, float]:
    """The social-cost minimiser; near-ties go to the lowest id."""
    costs = social_costs(space, population)
    best = costs.min()
    idx = int(np.flatnonzero(costs <= best + TOLERANCE * max(1.0, best))[0])
    return space.alternatives[idx], float(best)


def _ratio(cost: float, best: float) -> float:
    if best <= TOLERANCE:
        return 1.0 if cost <= TOLERANCE else math.inf
    return cost / best


def distortion(space: DecisionSpace, population: Sequence[Agent], a: Alternative) -> float:
    require_member(space, a)
    costs = social_costs(space, population)
    return _ratio(float(costs[a.id]), float(costs.min()))


def distortion_profile(
    space: DecisionSpace, population: Sequence[Agent] | np.ndarray
) -> np.ndarray:
    """Distortion of every alternative at once, indexed by id."""
    costs = social_costs(space, population)
    best = costs.min()
    if best <= TOLERANCE:
        return np.where(costs <= TOLERANCE, 1.0, math.inf)
    return costs / best


def pareto_efficient(space: DecisionSpace, population: Sequence[Agent], a: Alternative) -> bool:
    """False iff some alternative is weakly closer for everyone and strictly closer for someone."""
    require_member(space, a)
    d = point_distance_matrix(space, bliss_array(population))
    da = d[:, [a.id]]
    weakly = (d <= da + TOLERANCE).all(axis=0)
    strictly = (d < da - TOLERANCE).any(axis=0)
    return not bool((weakly & strictly).any())


# -------------------------------
# Stationary analysis
# -------------------------------


def stationary_bit_probability(f: float) -> float:
    """Long-run probability that one coordinate of the outcome is 1."""
    if not 0.0 <= f <= 1.0:
        raise InputError(f"f must lie in [0, 1], got {f}")
    return f * f / (f * f + (1.0 - f) ** 2)


def stationary_distortion(f: float) -> float:
    """Expected stationary distortion on one coordinate with frequency f."""
    if not 0.0 < f < 1.0:
        raise DomainError(f"stationary distortion needs 0 < f < 1, got {f}")
    pi = stationary_bit_probability(f)
    return (pi * (1.0 - f) + (1.0 - pi) * f) / min(f, 1.0 - f)


def worst_case_distortion(xatol: float = 1e-10) -> Tuple[float, float]:
    """(f*, D(f*)) maximising the stationary distortion over f in (0, 1/2]."""
    grid = np.linspace(0.0, 0.5, 5001)[1:]
    values = np.array([stationary_distortion(float(f)) for f in grid])
    i = int(values.argmax())
    step = grid[1] - grid[0]
    lo, hi = max(grid[i] - step, 1e-12), min(grid[i] + step, 0.5)

    res = minimize_scalar(
        lambda f: -stationary_distortion(f),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol},
    )
    f_star = float(res.x)
    logger.debug("Worst stationary distortion %.10f at f=%.10f", -res.fun, f_star)
    return f_star, stationary_distortion(f_star)


def stationary_curve(points: int = 99) -> pd.DataFrame:
    """Table of f, π₁(f) and the stationary distortion on an interior grid."""
    if points < 1:
        raise InputError(f"points must be positive, got {points}")
    fs = np.linspace(0.0, 1.0, points + 2)[1:-1]
    return pd.DataFrame(
        {
            "f": fs,
            "pi1": [stationary_bit_probability(float(f)) for f in fs],
            "distortion": [stationary_distortion(float(f)) for f in fs],
        }
    )


# -------------------------------
# Aggregation
# -------------------------------


@dataclass(frozen=True)
class DistortionReport:
    """Summary of R independent runs.

    ``per_run_final`` holds the finite final distortions in ascending order;
    infinite ones are only counted.
    """

    per_run_final: List[float]
    per_step_mean: List[float]
    per_step_q1: List[float]
    per_step_q3: List[float]
    mean: float
    q1: float
    q3: float
    second_moment: float
    infinite_count: int
    runs: int
    steps: int
    initial_mean: float
    scheme: str = ""
    initial_population_mean: Optional[float] = None
    pareto_fraction: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
            logger.info("Report saved: %s", path)
        return text

    def per_step_table(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": np.arange(1, self.steps + 1),
                "mean": self.per_step_mean,
                "q1": self.per_step_q1,
                "q3": self.per_step_q3,
            },
            columns=STEP_COLUMNS,
        )


def _column_stats(values: np.ndarray) -> Tuple[float, float, float]:
    # sorted before summing
    v = np.sort(values[np.isfinite(values)])
    if v.size == 0:
        return math.nan, math.nan, math.nan
    q1, q3 = np.quantile(v, [0.25, 0.75])
    return float(np.mean(v)), float(q1), float(q3)


def aggregate_runs(
    distortions: np.ndarray | Sequence[float],
    *,
    scheme: str = "",
    initial_population_final: Optional[Sequence[float]] = None,
    pareto_flags: Optional[Sequence[bool]] = None,
) -> DistortionReport:
    """Aggregate an R x (T+1) matrix of distortions.

    Column 0 is the initial alternative, column t the outcome of round t. A
    one-dimensional input is read as final distortions only (T = 0).
    """
    d = np.asarray(distortions, dtype=float)
    if d.ndim == 1:
        d = d[:, None]
    if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
        raise InputError(f"expected a non-empty runs x steps matrix, got shape {d.shape}")
    if (d < 1.0 - TOLERANCE).any():
        raise InputError("distortions must be at least 1")

    runs, cols = d.shape
    finals = d[:, -1]
    finite = np.sort(finals[np.isfinite(finals)])
    if finite.size == 0:
        raise DegenerateReportError(f"all {runs} runs ended with infinite distortion")

    steps = [_column_stats(d[:, t]) for t in range(1, cols)]
    mean, q1, q3 = _column_stats(finals)

    initial_population_mean = None
    if initial_population_final is not None:
        initial_population_mean = _column_stats(np.asarray(initial_population_final, dtype=float))[0]
    pareto_fraction = None
    if pareto_flags is not None:
        pareto_fraction = float(np.mean(np.asarray(pareto_flags, dtype=bool)))

    return DistortionReport(
        per_run_final=finite.tolist(),
        per_step_mean=[s[0] for s in steps],
        per_step_q1=[s[1] for s in steps],
        per_step_q3=[s[2] for s in steps],
        mean=mean,
        q1=q1,
        q3=q3,
        second_moment=float(np.mean(finite**2)),
        infinite_count=int(runs - finite.size),
        runs=runs,
        steps=cols - 1,
        initial_mean=_column_stats(d[:, 0])[0],
        scheme=scheme,
        initial_population_mean=initial_population_mean,
        pareto_fraction=pareto_fraction,
    )


def distortion_table(distortions: np.ndarray) -> pd.DataFrame:
    """Long table with one row per (run, step); step 0 is the initial alternative."""
    d = np.atleast_2d(np.asarray(distortions, dtype=float))
    runs, cols = d.shape
    return pd.DataFrame(
        {
            "run": np.repeat(np.arange(runs), cols),
            "step": np.tile(np.arange(cols), runs),
            "distortion": d.ravel(),
        },
        columns=DISTORTION_COLUMNS,
    )
