# src/seqdelib/bargaining.py
"""
One pairwise bargaining step.

Three schemes share the same Nash core:

- Nash: the alternative maximising the product of both agents' gains over the
  threat, restricted to alternatives neither agent likes less than the threat.
- Selfish: the Nash outcome pushed towards the more selfish agent's bliss point
  by (λ_u − λ_v) · noise, then snapped back onto the grid.
- Unselfish: the Nash outcome unchanged, after which both agents move their
  bliss points towards the partner and the threat by at most
  shift_scale · noise / λ.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import Optional, Tuple

import numpy as np

from seqdelib.errors import InputError, UnsupportedSpaceError
from seqdelib.population import Agent
from seqdelib.spaces import (
    TOLERANCE,
    Alternative,
    DecisionSpace,
    SpaceKind,
    clamp_to_line,
    nearest_alternative,
    point_distances,
)

logger = logging.getLogger(__name__)

SHIFT_SCALE = 0.05
NOISE_INTERVAL = (0.9, 1.0)


class SchemeTag(StrEnum):
    NASH = "nash"
    SELFISH = "selfish"
    UNSELFISH = "unselfish"


@dataclass(frozen=True)
class BargainScheme:
    tag: SchemeTag = SchemeTag.NASH
    shift_scale: float = SHIFT_SCALE  # Unselfish only
    noise_interval: Tuple[float, float] = NOISE_INTERVAL

    def __post_init__(self):
        object.__setattr__(self, "tag", SchemeTag(self.tag))
        low, high = self.noise_interval
        if not 0.0 < low <= high:
            raise InputError(f"noise interval must satisfy 0 < low <= high, got {self.noise_interval}")
        if not self.shift_scale > 0:
            raise InputError(f"shift_scale must be positive, got {self.shift_scale}")


@dataclass(frozen=True)
class BargainResult:
    outcome: Alternative
    updated_agents: Optional[Tuple[Agent, Agent]] = None


def _require_line(space: DecisionSpace, scheme: str) -> None:
    if space.kind is not SpaceKind.LINE:
        raise UnsupportedSpaceError(f"{scheme} bargaining is only defined on the line, got {space.kind.value}")


def nash_product(
    space: DecisionSpace, u: Agent, v: Agent, threat: Alternative, o: Alternative
) -> float:
    du = point_distances(space, u.bliss)
    dv = point_distances(space, v.bliss)
    return float((du[threat.id] - du[o.id]) * (dv[threat.id] - dv[o.id]))


def nash_bargain(space: DecisionSpace, u: Agent, v: Agent, threat: Alternative) -> Alternative:
    """Brute-force maximiser of the Nash product over the individually rational set.

    Ties go to the alternative closest to the threat, then to the lowest id.
    """
    du = point_distances(space, u.bliss)
    dv = point_distances(space, v.bliss)
    gain_u = du[threat.id] - du
    gain_v = dv[threat.id] - dv

    feasible = (gain_u >= -TOLERANCE) & (gain_v >= -TOLERANCE)
    feasible[threat.id] = True
    products = np.where(feasible, gain_u * gain_v, -np.inf)

    tied = np.flatnonzero(products >= products.max() - TOLERANCE)
    to_threat = space.distance_matrix[threat.id, tied]
    closest = tied[to_threat <= to_threat.min() + TOLERANCE]
    return space.alternatives[int(closest[0])]


def selfish_bargain(
    space: DecisionSpace,
    u: Agent,
    v: Agent,
    threat: Alternative,
    rng: np.random.Generator,
    scheme: BargainScheme = BargainScheme(SchemeTag.SELFISH),
) -> Alternative:
    """Nash outcome perturbed towards the bliss point of the more selfish agent."""
    _require_line(space, "selfish")
    if v.selfishness > u.selfishness:
        u, v = v, u

    outcome = nash_bargain(space, u, v, threat)
    weight = u.selfishness - v.selfishness
    direction = np.sign(u.bliss - outcome.coordinate)
    if weight == 0 or direction == 0:
        return outcome

    noise = rng.uniform(*scheme.noise_interval)
    shifted = outcome.coordinate + weight * noise * direction
    return nearest_alternative(space, clamp_to_line(shifted))


def _shift_towards(
    x: Agent, y: Agent, threat: float, rng: np.random.Generator, scheme: BargainScheme
) -> Agent:
    displacement = ((y.bliss - x.bliss) + (threat - x.bliss)) / 2
    if displacement == 0:
        return x
    noise = rng.uniform(*scheme.noise_interval)
    step = min(scheme.shift_scale * noise / x.selfishness, abs(displacement))
    return replace(x, bliss=clamp_to_line(x.bliss + math.copysign(step, displacement)))


def unselfish_bargain(
    space: DecisionSpace,
    u: Agent,
    v: Agent,
    threat: Alternative,
    rng: np.random.Generator,
    scheme: BargainScheme = BargainScheme(SchemeTag.UNSELFISH),
) -> BargainResult:
    """Nash outcome; afterwards both agents drift towards partner and threat.

    Both shifts are computed from the bliss points held before the bargain.
    """
    _require_line(space, "unselfish")
    outcome = nash_bargain(space, u, v, threat)
    a = float(threat.coordinate)
    updated_u = _shift_towards(u, v, a, rng, scheme)
    updated_v = _shift_towards(v, u, a, rng, scheme)
    return BargainResult(outcome, (updated_u, updated_v))


def bargain(
    space: DecisionSpace,
    u: Agent,
    v: Agent,
    threat: Alternative,
    scheme: BargainScheme,
    rng: np.random.Generator,
) -> BargainResult:
    if scheme.tag is SchemeTag.NASH:
        return BargainResult(nash_bargain(space, u, v, threat))
    if scheme.tag is SchemeTag.SELFISH:
        return BargainResult(selfish_bargain(space, u, v, threat, rng, scheme))
    return unselfish_bargain(space, u, v, threat, rng, scheme)
