import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import grid_agents, line_agents
from seqdelib.bargaining import (
    BargainScheme,
    SchemeTag,
    bargain,
    nash_bargain,
    nash_product,
    selfish_bargain,
    unselfish_bargain,
)
from seqdelib.errors import InputError, UnsupportedSpaceError
from seqdelib.population import Agent
from seqdelib.spaces import DecisionSpace, median3, nearest_alternative

LINE50 = DecisionSpace.line(50)


def at(x):
    return nearest_alternative(LINE50, x)


def test_nash_product_examples():
    u, v = line_agents(0.44, 0.56)
    assert nash_product(LINE50, u, v, at(0.10), at(0.44)) == pytest.approx(0.1156)
    assert nash_product(LINE50, u, v, at(0.10), at(0.10)) == 0
    u, v = line_agents(0.2, 0.8)
    assert nash_product(LINE50, u, v, at(0.5), at(0.4)) == pytest.approx(-0.01)


@pytest.mark.parametrize(
    "bu, bv, threat, expected",
    [(0.2, 0.8, 0.5, 0.5), (0.44, 0.56, 0.10, 0.44), (0.3, 0.9, 0.3, 0.3)],
)
def test_nash_bargain_examples(bu, bv, threat, expected):
    u, v = line_agents(bu, bv)
    assert nash_bargain(LINE50, u, v, at(threat)) == at(expected)


def test_nash_bargain_symmetric_tie_goes_to_threat_side():
    u, v = line_agents(0.4, 0.6)
    # threat already between them: only the threat is individually rational
    assert nash_bargain(LINE50, u, v, at(0.5)) == at(0.5)


@pytest.mark.parametrize("space", [DecisionSpace.line(51), DecisionSpace.line(201)])
def test_nash_equals_median_on_line_grid(space):
    rng = np.random.default_rng(21)
    for a, b, t in rng.integers(space.size, size=(1000, 3)):
        x, y, threat = (space.alternatives[i] for i in (a, b, t))
        u, v = line_agents(x.coordinate, y.coordinate)
        assert nash_bargain(space, u, v, threat) == median3(space, x, y, threat)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_nash_equals_median_on_hypercube(k):
    space = DecisionSpace.hypercube(k)
    rng = np.random.default_rng(22 + k)
    for a, b, t in rng.integers(space.size, size=(1000, 3)):
        u, v = grid_agents(space, a, b)
        threat = space.alternatives[t]
        assert nash_bargain(space, u, v, threat) == median3(space, u.bliss, v.bliss, threat)


def test_nash_off_grid_within_one_step():
    rng = np.random.default_rng(23)
    for bu, bv, t in zip(rng.random(500), rng.random(500), rng.integers(50, size=500)):
        u, v = line_agents(bu, bv)
        outcome = nash_bargain(LINE50, u, v, LINE50.alternatives[t])
        continuous = sorted((bu, bv, LINE50.alternatives[t].coordinate))[1]
        assert abs(outcome.coordinate - continuous) <= 1 / 50 + 1e-9


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999), st.integers(0, 49))
def test_nash_individually_rational(bu, bv, t):
    u, v = line_agents(bu, bv)
    threat = LINE50.alternatives[t]
    o = nash_bargain(LINE50, u, v, threat)
    assert abs(bu - o.coordinate) <= abs(bu - threat.coordinate) + 1e-9
    assert abs(bv - o.coordinate) <= abs(bv - threat.coordinate) + 1e-9
    # between the agents, or the threat itself
    lo, hi = min(bu, bv), max(bu, bv)
    assert o == threat or lo - 1 / 50 - 1e-9 <= o.coordinate <= hi + 1 / 50 + 1e-9


def test_scheme_validation():
    assert BargainScheme("selfish").tag is SchemeTag.SELFISH
    with pytest.raises(InputError):
        BargainScheme(noise_interval=(0.0, 1.0))
    with pytest.raises(InputError):
        BargainScheme(shift_scale=0.0)
    with pytest.raises(ValueError):
        BargainScheme("bogus")


def test_selfish_equal_weights_is_nash():
    u, v = line_agents(0.2, 0.8)
    rng = np.random.default_rng(0)
    for t in range(50):
        threat = LINE50.alternatives[t]
        assert selfish_bargain(LINE50, u, v, threat, rng) == nash_bargain(LINE50, u, v, threat)


def test_selfish_bliss_at_outcome_unchanged():
    u = Agent(0, 0.5, 1.3)
    v = Agent(1, 0.8, 1.0)
    assert selfish_bargain(LINE50, u, v, at(0.5), np.random.default_rng(0)) == at(0.5)


def test_selfish_worked_example():
    u = Agent(0, 0.8, 1.2)
    v = Agent(1, 0.2, 1.0)
    scheme = BargainScheme(SchemeTag.SELFISH, noise_interval=(0.95, 0.95))
    rng = np.random.default_rng(0)
    assert selfish_bargain(LINE50, u, v, at(0.5), rng, scheme) == at(0.68)
    # argument order does not matter
    assert selfish_bargain(LINE50, v, u, at(0.5), rng, scheme) == at(0.68)


def test_selfish_needs_line():
    cube = DecisionSpace.hypercube(2)
    u, v = grid_agents(cube, 0, 3)
    with pytest.raises(UnsupportedSpaceError):
        selfish_bargain(cube, u, v, cube.alternative(1), np.random.default_rng(0))


def test_unselfish_worked_example():
    u, v = line_agents(0.4, 0.6)
    scheme = BargainScheme(SchemeTag.UNSELFISH, shift_scale=0.05, noise_interval=(1.0, 1.0))
    result = unselfish_bargain(LINE50, u, v, at(0.5), np.random.default_rng(0), scheme)
    assert result.outcome == at(0.5)
    new_u, new_v = result.updated_agents
    assert new_u.bliss == pytest.approx(0.45)
    assert new_v.bliss == pytest.approx(0.55)
    assert (new_u.id, new_v.id) == (0, 1)


def test_unselfish_stubborn_agent_barely_moves():
    u = Agent(0, 0.4, 1e6)
    v = Agent(1, 0.6, 1.0)
    result = unselfish_bargain(LINE50, u, v, at(0.5), np.random.default_rng(0))
    assert result.updated_agents[0].bliss == pytest.approx(0.4, abs=1e-7)


def test_unselfish_no_shift_at_destination():
    # b_u = (b_v + a) / 2
    u, v = line_agents(0.5, 0.6)
    result = unselfish_bargain(LINE50, u, v, at(0.4), np.random.default_rng(0))
    assert result.updated_agents[0].bliss == 0.5


def test_unselfish_never_overshoots():
    rng = np.random.default_rng(24)
    scheme = BargainScheme(SchemeTag.UNSELFISH, shift_scale=0.5)
    for bu, bv, t in zip(rng.random(300), rng.random(300), rng.integers(50, size=300)):
        u, v = line_agents(bu, bv, selfishness=0.5)
        a = LINE50.alternatives[t].coordinate
        new_u, _ = unselfish_bargain(LINE50, u, v, LINE50.alternatives[t], rng, scheme).updated_agents
        disp = ((bv - bu) + (a - bu)) / 2
        assert abs(new_u.bliss - bu) <= abs(disp) + 1e-12
        assert 0.0 <= new_u.bliss < 1.0


def test_bargain_dispatch():
    u, v = line_agents(0.2, 0.8)
    rng = np.random.default_rng(0)
    nash = bargain(LINE50, u, v, at(0.3), BargainScheme(), rng)
    assert nash.updated_agents is None
    assert nash.outcome == nash_bargain(LINE50, u, v, at(0.3))
    unselfish = bargain(LINE50, u, v, at(0.3), BargainScheme(SchemeTag.UNSELFISH), rng)
    assert unselfish.updated_agents is not None


def test_line_schemes_accept_grid_point_bliss():
    u, v = Agent(0, LINE50.alternative(10), 1.2), Agent(1, LINE50.alternative(40))
    threat = at(0.5)
    scheme = BargainScheme(SchemeTag.SELFISH, noise_interval=(1.0, 1.0))
    rng = np.random.default_rng(0)
    expected = selfish_bargain(LINE50, Agent(0, 0.2, 1.2), Agent(1, 0.8), threat, rng, scheme)
    assert selfish_bargain(LINE50, u, v, threat, rng, scheme) == expected

    result = unselfish_bargain(LINE50, *grid_agents(LINE50, 20, 30), at(0.5), rng)
    assert all(isinstance(a.bliss, float) for a in result.updated_agents)
