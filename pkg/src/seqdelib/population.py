# src/seqdelib/population.py
"""
Agent populations for sequential deliberation.

Line populations follow the three-cluster protocol: cluster means are drawn
uniformly from [0, 1), every agent picks a cluster uniformly and draws its bliss
point from a normal around that mean. Discrete spaces get ε-unanimous,
two-point, uniform and hypercube bit-frequency populations.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from seqdelib.errors import InputError
from seqdelib.spaces import (
    LINE_UPPER,
    Alternative,
    DecisionSpace,
    Point,
    SpaceKind,
    alternative_value,
)

logger = logging.getLogger(__name__)

# -------------------------------
# Configuration
# -------------------------------

NUM_CLUSTERS = 3  # "types" of bliss points on the line
CLUSTER_SIGMA = 0.05  # standard deviation of every cluster
SELFISHNESS_MEAN = 1.0  # λ ~ N(1, 0.1)
SELFISHNESS_SIGMA = 0.1
MIN_SELFISHNESS = 0.01  # keeps 1/λ finite in the Unselfish update

CSV_COLUMNS = ["id", "bliss", "selfishness"]


@dataclass(frozen=True)
class Agent:
    """An agent: a bliss point plus a selfishness weight λ.

    A line alternative given as bliss is stored as its coordinate, so line
    agents always carry a float.
    """

    id: int
    bliss: Point
    selfishness: float = SELFISHNESS_MEAN

    def __post_init__(self):
        if isinstance(self.bliss, Alternative) and isinstance(self.bliss.coordinate, float):
            object.__setattr__(self, "bliss", self.bliss.coordinate)
        if not self.selfishness > 0:
            raise InputError(f"agent {self.id}: selfishness must be positive, got {self.selfishness}")


@dataclass(frozen=True)
class PopulationSpec:
    n_agents: int
    n_clusters: int = NUM_CLUSTERS
    cluster_sigma: float = CLUSTER_SIGMA
    selfishness_mean: float = SELFISHNESS_MEAN
    selfishness_sigma: float = SELFISHNESS_SIGMA

    def __post_init__(self):
        if self.n_agents < 1:
            raise InputError(f"n_agents must be positive, got {self.n_agents}")
        if self.n_clusters < 1:
            raise InputError(f"n_clusters must be positive, got {self.n_clusters}")
        if self.cluster_sigma < 0 or self.selfishness_sigma < 0:
            raise InputError("standard deviations must be non-negative")


Population = List[Agent]


# -------------------------------
# Helper functions
# -------------------------------


def _sample_selfishness(
    n: int,
    rng: np.random.Generator,
    mean: float = SELFISHNESS_MEAN,
    sigma: float = SELFISHNESS_SIGMA,
) -> np.ndarray:
    return np.maximum(rng.normal(mean, sigma, size=n), MIN_SELFISHNESS)


def _bliss_for(space: DecisionSpace, ids: Sequence[int]) -> list:
    # the line keeps bliss points as coordinates, other spaces as alternatives
    if space.kind is SpaceKind.LINE:
        return [float(space.alternatives[i].coordinate) for i in ids]
    return [space.alternatives[i] for i in ids]


def _assemble(bliss: Sequence[Point], selfishness: np.ndarray) -> Population:
    return [Agent(i, b, float(lam)) for i, (b, lam) in enumerate(zip(bliss, selfishness))]


def bliss_array(population: Sequence[Agent]) -> np.ndarray:
    """Bliss points as an array: coordinates on the line, alternative ids elsewhere."""
    if not population:
        return np.empty(0)
    if isinstance(population[0].bliss, Alternative):
        return np.array([a.bliss.id for a in population], dtype=int)
    return np.array([a.bliss for a in population], dtype=float)


# -------------------------------
# Population generators
# -------------------------------


def sample_population(spec: PopulationSpec, rng: np.random.Generator) -> Population:
    """Three-cluster Gaussian population on the line."""
    means = rng.uniform(0.0, 1.0, size=spec.n_clusters)
    clusters = rng.integers(0, spec.n_clusters, size=spec.n_agents)
    bliss = np.clip(rng.normal(means[clusters], spec.cluster_sigma), 0.0, LINE_UPPER)
    selfishness = _sample_selfishness(
        spec.n_agents, rng, spec.selfishness_mean, spec.selfishness_sigma
    )
    logger.debug("Cluster means %s", np.round(means, 4).tolist())
    return _assemble([float(b) for b in bliss], selfishness)


def sample_epsilon_unanimous(
    n: int, epsilon: float, space: DecisionSpace, rng: np.random.Generator
) -> Population:
    """All but an ε fraction of the agents share one uniformly drawn bliss point."""
    if not 0.0 <= epsilon < 1.0:
        raise InputError(f"epsilon must lie in [0, 1), got {epsilon}")
    if n < 1:
        raise InputError(f"n must be positive, got {n}")

    majority = min(n, math.ceil(round((1.0 - epsilon) * n, 9)))
    common = int(rng.integers(space.size))
    others = np.delete(np.arange(space.size), common)
    if others.size == 0:
        others = np.array([common])
    minority = rng.choice(others, size=n - majority)

    ids = [common] * majority + [int(i) for i in minority]
    return _assemble(_bliss_for(space, ids), _sample_selfishness(n, rng))


def hypercube_population_from_f(
    f: Sequence[float],
    n: int,
    rng: np.random.Generator,
    space: DecisionSpace | None = None,
) -> Population:
    """Agents whose k-th bit is 1 independently with probability f[k]."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InputError("f must be a non-empty vector")
    if ((f < 0.0) | (f > 1.0)).any():
        raise InputError(f"bit frequencies must lie in [0, 1], got {f.tolist()}")
    k = f.size
    if space is None:
        space = DecisionSpace.hypercube(k)
    elif space.kind is not SpaceKind.HYPERCUBE or space.dimension != k:
        raise InputError(f"f has {k} entries but the space is {space!r}")

    bits = rng.random((n, k)) < f
    weights = 1 << np.arange(k - 1, -1, -1)
    ids = bits.astype(np.int64) @ weights
    return _assemble(_bliss_for(space, ids), _sample_selfishness(n, rng))


def sample_uniform_population(
    space: DecisionSpace, n: int, rng: np.random.Generator
) -> Population:
    ids = rng.integers(space.size, size=n)
    return _assemble(_bliss_for(space, ids), _sample_selfishness(n, rng))


def sample_two_point_population(
    space: DecisionSpace, n: int, f: float, rng: np.random.Generator
) -> Population:
    """round(f·n) agents at alternative 1, everyone else at alternative 0."""
    if space.size < 2:
        raise InputError("two-point population needs at least two alternatives")
    if not 0.0 <= f <= 1.0:
        raise InputError(f"f must lie in [0, 1], got {f}")
    minority = round(f * n)
    ids = [1] * minority + [0] * (n - minority)
    return _assemble(_bliss_for(space, ids), _sample_selfishness(n, rng))


def population_for_space(
    space: DecisionSpace, spec: PopulationSpec, rng: np.random.Generator
) -> Population:
    """The fresh per-run population used by the simulation harness."""
    if space.kind is SpaceKind.LINE:
        return sample_population(spec, rng)
    if space.kind is SpaceKind.HYPERCUBE:
        f = rng.uniform(0.0, 1.0, size=space.dimension)
        return hypercube_population_from_f(f, spec.n_agents, rng, space)
    return sample_uniform_population(space, spec.n_agents, rng)


# -------------------------------
# CSV interface
# -------------------------------


def population_frame(space: DecisionSpace, population: Sequence[Agent]) -> pd.DataFrame:
    rows = [
        {
            "id": a.id,
            "bliss": alternative_value(space, a.bliss) if isinstance(a.bliss, Alternative) else a.bliss,
            "selfishness": a.selfishness,
        }
        for a in population
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_population_csv(space: DecisionSpace, population: Sequence[Agent], path: str | Path) -> None:
    population_frame(space, population).to_csv(path, index=False)
    logger.info("Population saved: %s (%d agents)", path, len(population))


def read_population_csv(path: str | Path, space: DecisionSpace) -> Population:
    df = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise InputError(f"Missing column in CSV: {', '.join(missing)}")

    population = []
    for row in df.itertuples(index=False):
        if space.kind is SpaceKind.LINE:
            bliss = float(row.bliss)
            if not 0.0 <= bliss < 1.0:
                raise InputError(f"agent {row.id}: bliss {bliss} outside [0, 1)")
        else:
            bliss = space.alternative(int(row.bliss))
        population.append(Agent(int(row.id), bliss, float(row.selfishness)))
    return population


if __name__ == "__main__":
    print("Generating a three-cluster line population...")
    rng = np.random.default_rng(0)
    agents = sample_population(PopulationSpec(n_agents=300), rng)
    Path("data").mkdir(exist_ok=True)
    write_population_csv(DecisionSpace.line(50), agents, "data/population.csv")
    print(f"Population saved: data/population.csv ({len(agents):,} agents)")
