# src/seqdelib/experiments.py
"""
Reproducible experiment recipes.

``simulate`` is the main Monte Carlo harness: every run draws a fresh population
from its own substream ``default_rng([master_seed, run_index])``, deliberates
(or applies a one-shot baseline) and records the distortion after every round.
The named recipes below check the closed-form claims on small instances.
"""

import logging
import multiprocessing
import os
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional

import networkx as nx
import numpy as np
import pandas as pd
from tqdm import tqdm

from seqdelib.analytics import (
    DistortionReport,
    aggregate_runs,
    distortion_profile,
    pareto_efficient,
    stationary_bit_probability,
)
from seqdelib.bargaining import NOISE_INTERVAL, SHIFT_SCALE, BargainScheme, SchemeTag
from seqdelib.deliberation import (
    DeliberationTrace,
    one_shot_median3,
    random_dictator,
    run_deliberation,
)
from seqdelib.errors import InputError
from seqdelib.population import (
    Agent,
    Population,
    PopulationSpec,
    hypercube_population_from_f,
    population_for_space,
    population_frame,
    sample_epsilon_unanimous,
    sample_population,
    sample_two_point_population,
    sample_uniform_population,
)
from seqdelib.spaces import DecisionSpace, SpaceKind

logger = logging.getLogger(__name__)

# -------------------------------
# Configuration
# -------------------------------

NUM_ALTERNATIVES = 50  # |S| on the line
NUM_AGENTS = 300  # |A|
NUM_STEPS = 10  # deliberation rounds T
NUM_RUNS = 1000  # simulations per scheme
DEFAULT_SIZES = {"line": NUM_ALTERNATIVES, "hypercube": 2**10, "star": NUM_ALTERNATIVES}
DEFAULT_SEED = 20170101

SEED_ENV = "SEQDELIB_SEED"
WORKERS_ENV = "SEQDELIB_WORKERS"

BASELINE_SCHEMES = ("dictator", "median3")
SCHEMES = tuple(t.value for t in SchemeTag) + BASELINE_SCHEMES
FORMATS = ("csv", "json")
POPULATION_COLUMNS = ["run", "stage", "id", "bliss", "selfishness"]

# stationary chain check on the hypercube
STATIONARY_DIMENSION = 8
STATIONARY_AGENTS = 2000
STATIONARY_STEPS = 5000
STATIONARY_BURN_IN = 500

UNANIMITY_AGENTS = 100
SECOND_MOMENT_AGENTS = 1000


def _env_int(var: str) -> Optional[int]:
    raw = os.environ.get(var)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{var} must be an integer, got {raw!r}") from None


def resolve_seed(seed: Optional[int] = None) -> int:
    """The explicit seed, else $SEQDELIB_SEED, else DEFAULT_SEED."""
    if seed is None:
        seed = _env_int(SEED_ENV)
    if seed is None:
        seed = DEFAULT_SEED
    if not 0 <= seed < 2**64:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


@dataclass(frozen=True)
class SimulationConfig:
    space: str = SpaceKind.LINE.value
    alternatives: int = NUM_ALTERNATIVES
    graph_path: Optional[str] = None
    population: PopulationSpec = field(default_factory=lambda: PopulationSpec(NUM_AGENTS))
    scheme: str = SchemeTag.NASH.value
    steps: int = NUM_STEPS
    runs: int = NUM_RUNS
    master_seed: int = DEFAULT_SEED
    shift_scale: float = SHIFT_SCALE
    noise_interval: tuple = NOISE_INTERVAL
    epsilon: Optional[float] = None  # ε-unanimous populations instead of the default generator
    out: str = "results"
    format: str = "json"
    workers: int = 1
    progress: bool = False

    def __post_init__(self):
        if self.space not in {k.value for k in SpaceKind}:
            raise InputError(f"unknown space {self.space!r}")
        if self.space == SpaceKind.GRAPH and not self.graph_path:
            raise InputError("a graph space needs an edge-list path")
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown scheme {self.scheme!r}, expected one of {', '.join(SCHEMES)}")
        if self.alternatives < 1:
            raise InputError(f"alternatives must be positive, got {self.alternatives}")
        if self.space == SpaceKind.HYPERCUBE and (
            self.alternatives < 2 or self.alternatives & (self.alternatives - 1)
        ):
            raise InputError(f"hypercube size must be a power of two >= 2, got {self.alternatives}")
        if self.space == SpaceKind.STAR and self.alternatives < 2:
            raise InputError("a star needs at least two alternatives")
        if self.steps < 0:
            raise InputError(f"steps must be non-negative, got {self.steps}")
        if self.runs < 1:
            raise InputError(f"runs must be positive, got {self.runs}")
        if not 0 <= self.master_seed < 2**64:
            raise InputError(f"seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if self.epsilon is not None and not 0.0 <= self.epsilon < 1.0:
            raise InputError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")
        if self.workers < 1:
            raise InputError(f"workers must be positive, got {self.workers}")
        if self.scheme not in BASELINE_SCHEMES:
            self.bargain_scheme()  # validates shift_scale and noise_interval

    @classmethod
    def from_env(cls, **overrides) -> "SimulationConfig":
        """Defaults, then environment variables, then explicit (non-None) overrides."""
        values = {}
        for key, var in (("master_seed", SEED_ENV), ("workers", WORKERS_ENV)):
            value = _env_int(var)
            if value is not None:
                values[key] = value
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def is_baseline(self) -> bool:
        return self.scheme in BASELINE_SCHEMES

    @property
    def effective_steps(self) -> int:
        return 0 if self.is_baseline else self.steps

    def bargain_scheme(self) -> BargainScheme:
        return BargainScheme(SchemeTag(self.scheme), self.shift_scale, tuple(self.noise_interval))

    def build_space(self) -> DecisionSpace:
        kind = SpaceKind(self.space)
        if kind is SpaceKind.LINE:
            return DecisionSpace.line(self.alternatives)
        if kind is SpaceKind.HYPERCUBE:
            return DecisionSpace.hypercube(self.alternatives.bit_length() - 1)
        if kind is SpaceKind.STAR:
            return DecisionSpace.star(self.alternatives - 1)
        return DecisionSpace.from_edge_list(Path(self.graph_path))


class RunOutcome(NamedTuple):
    distortions: np.ndarray  # length T+1, index 0 is the initial alternative
    initial_population_final: float
    pareto: bool
    trace: Optional[DeliberationTrace]
    population: Population


@dataclass
class SimulationResult:
    report: DistortionReport
    distortions: np.ndarray  # runs x (T+1)
    traces: List[Optional[DeliberationTrace]]
    populations: List[Population]


# -------------------------------
# Simulation harness
# -------------------------------


def _population(config: SimulationConfig, space: DecisionSpace, rng: np.random.Generator) -> Population:
    if config.epsilon is not None:
        return sample_epsilon_unanimous(config.population.n_agents, config.epsilon, space, rng)
    return population_for_space(space, config.population, rng)


def _run_once(config: SimulationConfig, space: DecisionSpace, run_index: int) -> RunOutcome:
    rng = np.random.default_rng([config.master_seed, run_index])
    population = _population(config, space, rng)
    profile = distortion_profile(space, population)

    if config.scheme == "dictator":
        final = random_dictator(space, population, rng)
        return RunOutcome(profile[[final.id]], float(profile[final.id]),
                          pareto_efficient(space, population, final), None, population)
    if config.scheme == "median3":
        final = one_shot_median3(space, population, rng)
        return RunOutcome(profile[[final.id]], float(profile[final.id]),
                          pareto_efficient(space, population, final), None, population)

    trace = run_deliberation(space, population, config.bargain_scheme(), config.steps, rng)
    ids = [trace.initial.id] + [o.id for o in trace.outcomes]
    if trace.population_snapshots is None:
        row = profile[ids]
    else:
        # each round is scored against the population it was decided by
        row = np.array(
            [profile[trace.initial.id]]
            + [distortion_profile(space, points)[o] for points, o in zip(trace.population_snapshots, ids[1:])]
        )
    pareto = pareto_efficient(space, trace.final_population, trace.final)
    logger.debug("Run %d: final %s, distortion %.4f", run_index, trace.final, row[-1])
    return RunOutcome(row, float(profile[trace.final.id]), pareto, trace, population)


def _run_chunk(config: SimulationConfig, space: DecisionSpace, indices: List[int]) -> List[RunOutcome]:
    return [_run_once(config, space, i) for i in indices]


def simulate(config: SimulationConfig, space: Optional[DecisionSpace] = None) -> SimulationResult:
    """Run ``config.runs`` independent simulations and aggregate them.

    Results do not depend on ``config.workers``.
    """
    if space is None:
        space = config.build_space()
    logger.info(
        "Simulating %s on %r: %d runs, %d agents, T=%d, seed %d",
        config.scheme, space, config.runs, config.population.n_agents,
        config.effective_steps, config.master_seed,
    )

    if config.workers > 1:
        chunks = [c.tolist() for c in np.array_split(np.arange(config.runs), config.workers * 4) if c.size]
        worker = partial(_run_chunk, config, space)
        with multiprocessing.Pool(config.workers) as pool:
            # imap keeps chunk order
            outcomes = [
                o
                for chunk in tqdm(pool.imap(worker, chunks), total=len(chunks), desc=config.scheme,
                                  unit="chunk", disable=not config.progress)
                for o in chunk
            ]
    else:
        outcomes = [
            _run_once(config, space, i)
            for i in tqdm(range(config.runs), desc=config.scheme, disable=not config.progress)
        ]

    distortions = np.vstack([o.distortions for o in outcomes])
    report = aggregate_runs(
        distortions,
        scheme=config.scheme,
        initial_population_final=[o.initial_population_final for o in outcomes],
        pareto_flags=[o.pareto for o in outcomes],
    )
    logger.info("Mean final distortion %.4f (q1 %.4f, q3 %.4f)", report.mean, report.q1, report.q3)
    return SimulationResult(report, distortions, [o.trace for o in outcomes], [o.population for o in outcomes])


def run_paper_simulation(config: SimulationConfig) -> DistortionReport:
    return simulate(config).report


def population_table(space: DecisionSpace, result: SimulationResult) -> pd.DataFrame:
    """Bliss points of every run: the initial draw and, for deliberation runs, the final population."""
    frames = []
    for run, (initial, trace) in enumerate(zip(result.populations, result.traces)):
        stages = [("initial", initial)]
        if trace is not None:
            stages.append(("final", trace.final_population))
        for stage, population in stages:
            frame = population_frame(space, population)
            frame.insert(0, "stage", stage)
            frame.insert(0, "run", run)
            frames.append(frame)
    return pd.concat(frames, ignore_index=True)[POPULATION_COLUMNS]


# -------------------------------
# Theory checks
# -------------------------------


class KStarResult(NamedTuple):
    dictator: float
    deliberation: float
    expected_dictator: float


class UnanimityResult(NamedTuple):
    deliberation: float
    dictator: float


class SecondMomentResult(NamedTuple):
    dictator: float
    deliberation: float
    dictator_closed_form: float


class StationaryResult(NamedTuple):
    empirical: float
    theoretical: float


def _two_node_space() -> DecisionSpace:
    return DecisionSpace.graph([(0, 1)])


def _deliberation_distortion(
    space: DecisionSpace,
    population: Population,
    profile: np.ndarray,
    steps: int,
    rng: np.random.Generator,
) -> float:
    trace = run_deliberation(space, population, BargainScheme(SchemeTag.NASH), steps, rng)
    return float(profile[trace.final.id])


def run_kstar_experiment(
    k: int, runs: int, rng: np.random.Generator, steps: int = NUM_STEPS
) -> KStarResult:
    """k agents, one per leaf of a k-star: dictator vs Nash deliberation."""
    if k < 2:
        raise InputError(f"k-star experiment needs k >= 2, got {k}")
    space = DecisionSpace.star(k)
    population = [Agent(i, space.alternatives[i + 1]) for i in range(k)]
    profile = distortion_profile(space, population)

    dictator = [profile[random_dictator(space, population, rng).id] for _ in range(runs)]
    deliberation = [_deliberation_distortion(space, population, profile, steps, rng) for _ in range(runs)]
    return KStarResult(float(np.mean(dictator)), float(np.mean(deliberation)), 2 * (k - 1) / k)


def run_unanimity_experiment(
    epsilon: float,
    runs: int,
    rng: np.random.Generator,
    n_agents: int = UNANIMITY_AGENTS,
    steps: int = NUM_STEPS,
) -> UnanimityResult:
    """Mean distortion of deliberation and dictatorship on ε-unanimous two-point instances."""
    if not 0.0 <= epsilon < 0.5:
        raise InputError(f"epsilon must lie in [0, 0.5), got {epsilon}")
    space = _two_node_space()
    deliberation, dictator = [], []
    for _ in range(runs):
        population = sample_epsilon_unanimous(n_agents, epsilon, space, rng)
        profile = distortion_profile(space, population)
        dictator.append(profile[random_dictator(space, population, rng).id])
        deliberation.append(_deliberation_distortion(space, population, profile, steps, rng))
    return UnanimityResult(float(np.mean(deliberation)), float(np.mean(dictator)))


def run_second_moment_experiment(
    f: float,
    runs: int,
    rng: np.random.Generator,
    n_agents: int = SECOND_MOMENT_AGENTS,
    steps: int = NUM_STEPS,
) -> SecondMomentResult:
    """Second moments of the distortion with a fraction f of agents on the minority node."""
    if not 0.0 < f <= 0.5:
        raise InputError(f"f must lie in (0, 0.5], got {f}")
    space = _two_node_space()
    population = sample_two_point_population(space, n_agents, f, rng)
    profile = distortion_profile(space, population)

    dictator = np.array([profile[random_dictator(space, population, rng).id] for _ in range(runs)])
    deliberation = np.array(
        [_deliberation_distortion(space, population, profile, steps, rng) for _ in range(runs)]
    )
    closed_form = (1.0 - f) + (1.0 - f) ** 2 / f
    return SecondMomentResult(float(np.mean(dictator**2)), float(np.mean(deliberation**2)), closed_form)


def run_stationary_experiment(
    f: float,
    rng: np.random.Generator,
    dimension: int = STATIONARY_DIMENSION,
    n_agents: int = STATIONARY_AGENTS,
    steps: int = STATIONARY_STEPS,
    burn_in: int = STATIONARY_BURN_IN,
) -> StationaryResult:
    """Long-run bit-1 frequency of the Nash chain on a hypercube against π₁.

    Both sides are averaged over the dimensions; the theoretical side uses the
    realised fraction of agents holding each bit.
    """
    space = DecisionSpace.hypercube(dimension)
    population = hypercube_population_from_f([f] * dimension, n_agents, rng, space)
    trace = run_deliberation(space, population, BargainScheme(SchemeTag.NASH), burn_in + steps, rng)

    ids = np.array([o.id for o in trace.outcomes[burn_in:]])
    shifts = np.arange(dimension - 1, -1, -1)
    empirical = float(((ids[:, None] >> shifts) & 1).mean())

    agent_ids = np.array([a.bliss.id for a in population])
    f_hat = ((agent_ids[:, None] >> shifts) & 1).mean(axis=0)
    theoretical = float(np.mean([stationary_bit_probability(float(x)) for x in f_hat]))
    logger.info("Stationary check f=%.4f: empirical %.4f, theory %.4f", f, empirical, theoretical)
    return StationaryResult(empirical, theoretical)


def run_dictatorship_experiment(
    runs: int,
    rng: np.random.Generator,
    spec: PopulationSpec = PopulationSpec(NUM_AGENTS),
    alternatives: int = NUM_ALTERNATIVES,
) -> float:
    """Mean distortion of random dictatorship over fresh line populations."""
    space = DecisionSpace.line(alternatives)
    values = []
    for _ in range(runs):
        population = sample_population(spec, rng)
        values.append(distortion_profile(space, population)[random_dictator(space, population, rng).id])
    return float(np.mean(values))


def run_general_graph_experiment(
    space: DecisionSpace,
    runs: int,
    rng: np.random.Generator,
    n_agents: int = NUM_AGENTS,
    steps: int = NUM_STEPS,
) -> float:
    """Largest final Nash-deliberation distortion seen on an arbitrary graph."""
    worst = 1.0
    for _ in range(runs):
        population = sample_uniform_population(space, n_agents, rng)
        profile = distortion_profile(space, population)
        worst = max(worst, _deliberation_distortion(space, population, profile, steps, rng))
    return worst


# -------------------------------
# Registry
# -------------------------------


@dataclass(frozen=True)
class ExperimentParams:
    """Loose knobs for the registry; None picks the recipe's own default."""

    seed: int = DEFAULT_SEED
    runs: Optional[int] = None
    steps: int = NUM_STEPS
    f: Optional[float] = None
    k: Optional[int] = None
    epsilon: Optional[float] = None
    graph_path: Optional[str] = None


def _pick(value, default):
    return default if value is None else value


def _kstar(p: ExperimentParams, rng: np.random.Generator) -> dict:
    return run_kstar_experiment(_pick(p.k, 50), _pick(p.runs, 1000), rng, p.steps)._asdict()


def _unanimity(p: ExperimentParams, rng: np.random.Generator) -> dict:
    return run_unanimity_experiment(_pick(p.epsilon, 0.1), _pick(p.runs, 5000), rng, steps=p.steps)._asdict()


def _second_moment(p: ExperimentParams, rng: np.random.Generator) -> dict:
    return run_second_moment_experiment(_pick(p.f, 0.01), _pick(p.runs, 10000), rng, steps=p.steps)._asdict()


def _stationary(p: ExperimentParams, rng: np.random.Generator) -> dict:
    return run_stationary_experiment(_pick(p.f, 1 - np.sqrt(2) / 2), rng)._asdict()


def _dictatorship(p: ExperimentParams, rng: np.random.Generator) -> dict:
    return {"dictator": run_dictatorship_experiment(_pick(p.runs, 10000), rng)}


def _general_graph(p: ExperimentParams, rng: np.random.Generator) -> dict:
    if p.graph_path:
        space = DecisionSpace.from_edge_list(p.graph_path)
    else:
        space = DecisionSpace.graph(nx.petersen_graph().edges())
    worst = run_general_graph_experiment(space, _pick(p.runs, 1000), rng, steps=p.steps)
    return {"max_distortion": worst, "median_graph": space.is_median_graph}


EXPERIMENTS: Dict[str, Callable[[ExperimentParams, np.random.Generator], dict]] = {
    "kstar": _kstar,
    "unanimity": _unanimity,
    "second-moment": _second_moment,
    "stationary": _stationary,
    "dictatorship": _dictatorship,
    "general-graph": _general_graph,
}


def run_experiment(name: str, params: ExperimentParams = ExperimentParams()) -> dict:
    if name not in EXPERIMENTS:
        raise InputError(f"unknown experiment {name!r}, expected one of {', '.join(EXPERIMENTS)}")
    if params.runs is not None and params.runs < 1:
        raise InputError(f"runs must be positive, got {params.runs}")
    logger.info("Running experiment %s with %s", name, params)
    result = EXPERIMENTS[name](params, np.random.default_rng(params.seed))
    return {"experiment": name, "seed": params.seed, **{k: _plain(v) for k, v in result.items()}}


def _plain(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value
