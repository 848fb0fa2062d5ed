import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scalebandits.model import (
    EpisodeTrace,
    Instance,
    checkpoint_rounds,
    draw_reward,
    normalize_instance,
    regret_increment,
)

means = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8).filter(lambda xs: max(xs) > 0)


def test_normalize_examples():
    inst = normalize_instance([0.5, 0.8])
    assert inst.theta == (0.625, 1.0)
    assert inst.scale == 0.8
    assert inst.optimal_arm == 1

    inst = normalize_instance([0.005, 0.001])
    assert inst.theta == (1.0, 0.2)
    assert inst.scale == 0.005

    assert normalize_instance([1.0]) == Instance((1.0,), 1.0)


def test_normalize_rejects_all_zero():
    with pytest.raises(ValueError, match="zero"):
        normalize_instance([0.0, 0.0])
    with pytest.raises(ValueError):
        normalize_instance([])
    with pytest.raises(ValueError):
        normalize_instance([1.2, 0.3])


@given(means)
def test_normalize_properties(raw):
    inst = normalize_instance(raw)
    assert max(inst.theta) == 1.0
    assert all(0.0 <= th <= 1.0 for th in inst.theta)
    assert inst.theta[inst.optimal_arm] == 1.0
    top = max(raw)
    assert {i for i, x in enumerate(raw) if x == top} == {
        i for i, th in enumerate(inst.theta) if th == 1.0
    }
    assert inst.scale == top


def test_instance_invariants_enforced():
    with pytest.raises(ValueError):
        Instance((0.5, 0.9))
    with pytest.raises(ValueError):
        Instance(())
    assert Instance((0.2, 1.0)).gaps == (0.8, 0.0)


def test_draw_reward_degenerate(rng):
    assert all(draw_reward(rng, 0.0, 0.7) == 0 for _ in range(1000))
    assert all(draw_reward(rng, 1.0, 1.0) == 1 for _ in range(1000))


def test_draw_reward_mean(rng):
    n = 10**5
    mean = sum(draw_reward(rng, 0.5, 0.8) for _ in range(n)) / n
    se = math.sqrt(0.4 * 0.6 / n)
    assert abs(mean - 0.4) <= 3 * se


def test_draw_reward_uses_one_uniform():
    from conftest import CountingRNG

    r = CountingRNG(np.random.default_rng(1))
    for _ in range(17):
        draw_reward(r, 0.3, 0.9)
    assert r.calls == 17


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2**32))
def test_scaling_equivalence_bit_identical(c, theta_a, seed):
    a = np.random.default_rng(seed)
    b = np.random.default_rng(seed)
    assert draw_reward(a, 1.0, c * theta_a) == draw_reward(b, c, theta_a)


def test_regret_increment_examples():
    inst = normalize_instance([0.5, 0.8])
    assert regret_increment(inst, 1.0, 0) == pytest.approx(0.375, abs=1e-15)
    assert regret_increment(inst, 0.0, 0) == 0.0
    for q in (0.0, 0.3, 1.0):
        assert regret_increment(inst, q, inst.optimal_arm) == 0.0
    with pytest.raises(IndexError):
        regret_increment(inst, 1.0, 2)


def test_checkpoint_rounds():
    assert list(checkpoint_rounds(0, 100)) == []
    assert list(checkpoint_rounds(100, 100)) == [100]
    assert list(checkpoint_rounds(250, 100)) == [100, 200, 250]
    assert list(checkpoint_rounds(3, 1)) == [1, 2, 3]


def test_trace_invariants():
    tr = EpisodeTrace(seed=1, horizon=300)
    tr.append(100, 10, 2.0, 50.0)
    tr.append(200, 20, 3.0, 90.0)
    with pytest.raises(ValueError):
        tr.append(200, 30, 4.0, 100.0)  # round not increasing
    with pytest.raises(ValueError):
        EpisodeTrace(1, 300, [100, 200], [5, 4], [0, 0], [1, 1])  # reward decreasing
    with pytest.raises(ValueError):
        EpisodeTrace(1, 300, [100], [5], [3.0], [2.0])  # regret above quality
    assert tr.final_regret == 3.0
    assert tr.regret_at(100) == 2.0
