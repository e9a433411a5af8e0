# src/seqdelib/deliberation.py
"""
Sequential deliberation and its one-shot baselines.

Each round draws two distinct agents uniformly, lets them bargain with the
current disagreement alternative as threat, and the outcome becomes the next
round's threat. After T rounds the last outcome is the social choice.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from seqdelib.bargaining import BargainScheme, bargain
from seqdelib.errors import InputError, StructuralError
from seqdelib.population import Agent, bliss_array
from seqdelib.spaces import Alternative, DecisionSpace, alternative_value, median3, snap

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["run", "step", "agent_u", "agent_v", "threat", "outcome"]


@dataclass(frozen=True)
class DeliberationStep:
    round: int
    agent_u: int
    agent_v: int
    threat: Alternative
    outcome: Alternative


@dataclass
class DeliberationTrace:
    initial: Alternative
    steps: List[DeliberationStep]
    final: Alternative
    # bliss points after every round, Unselfish runs only
    population_snapshots: Optional[List[np.ndarray]] = None
    final_population: List[Agent] = field(default_factory=list)

    @property
    def outcomes(self) -> List[Alternative]:
        return [s.outcome for s in self.steps]


def _draw_pair(n: int, rng: np.random.Generator) -> tuple[int, int]:
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    return i, j


def run_deliberation(
    space: DecisionSpace,
    population: Sequence[Agent],
    scheme: BargainScheme,
    T: int,
    rng: np.random.Generator,
    initial: Optional[Alternative] = None,
) -> DeliberationTrace:
    """Run T rounds of pairwise bargaining on a private copy of the population."""
    if T < 0:
        raise InputError(f"number of rounds must be non-negative, got {T}")
    if not population:
        raise InputError("population is empty")
    if T >= 1 and len(population) < 2:
        raise InputError("deliberation needs at least two agents")

    agents = list(population)
    if initial is None:
        initial = snap(space, agents[int(rng.integers(len(agents)))].bliss)

    threat = initial
    steps = []
    snapshots = None
    for t in range(1, T + 1):
        i, j = _draw_pair(len(agents), rng)
        result = bargain(space, agents[i], agents[j], threat, scheme, rng)
        if result.updated_agents is not None:
            agents[i], agents[j] = result.updated_agents
            if snapshots is None:
                snapshots = []
            snapshots.append(bliss_array(agents))
        steps.append(DeliberationStep(t, agents[i].id, agents[j].id, threat, result.outcome))
        threat = result.outcome

    logger.debug("Deliberation %s: %d rounds, final %s", scheme.tag.value, T, threat)
    return DeliberationTrace(initial, steps, threat, snapshots, agents)


def random_dictator(
    space: DecisionSpace, population: Sequence[Agent], rng: np.random.Generator
) -> Alternative:
    """The (snapped) bliss point of a uniformly drawn agent."""
    if not population:
        raise InputError("population is empty")
    return snap(space, population[int(rng.integers(len(population)))].bliss)


def one_shot_median3(
    space: DecisionSpace, population: Sequence[Agent], rng: np.random.Generator
) -> Alternative:
    """Median of the snapped bliss points of three distinct random agents."""
    if not space.is_median_graph:
        raise StructuralError(f"{space!r} is not a median graph")
    if len(population) < 3:
        raise InputError("one-shot median needs at least three agents")
    picks = rng.choice(len(population), size=3, replace=False)
    u, v, w = (snap(space, population[int(i)].bliss) for i in picks)
    return median3(space, u, v, w)


def trace_table(space: DecisionSpace, traces: Sequence[DeliberationTrace]) -> pd.DataFrame:
    """One row per bargaining round: run, step, agent_u, agent_v, threat, outcome."""
    rows = [
        {
            "run": run,
            "step": s.round,
            "agent_u": s.agent_u,
            "agent_v": s.agent_v,
            "threat": alternative_value(space, s.threat),
            "outcome": alternative_value(space, s.outcome),
        }
        for run, trace in enumerate(traces)
        for s in trace.steps
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)
