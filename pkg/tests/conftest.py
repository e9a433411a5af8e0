import numpy as np
import pytest

from seqdelib.population import Agent
from seqdelib.spaces import DecisionSpace


@pytest.fixture
def line50():
    return DecisionSpace.line(50)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def line_agents(*bliss, selfishness=1.0):
    return [Agent(i, float(b), selfishness) for i, b in enumerate(bliss)]


def grid_agents(space, *ids):
    return [Agent(i, space.alternatives[a]) for i, a in enumerate(ids)]


def write_edges(path, edges):
    path.write_text("# test graph\n" + "".join(f"{u} {v}\n" for u, v in edges))
    return path
