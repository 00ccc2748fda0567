import math

import numpy as np
import pytest

from scmilab.bandit import (BanditEnv, Schedule, exp_weights, mix_floor,
                            one_step_bound_value, one_step_report,
                            regret_exponent, run_ensemble,
                            square_transfer_margin, square_transfer_sweep)
from scmilab.joint import DiscreteJoint


def test_exp_weights_softmax():
    w = exp_weights(1.0, np.array([0.0, math.log(3.0)]))
    assert w[1] == pytest.approx(0.75)
    # huge scores do not overflow
    w = exp_weights(1.0, np.array([1e4, 0.0]))
    assert w[0] == pytest.approx(1.0)


def test_mix_floor_sums_to_one():
    rho = np.array([0.9, 0.1])
    mixed = mix_floor(rho, 0.25)
    assert mixed.sum() == pytest.approx(1.0)
    assert mixed.min() >= 0.25


def test_ensemble_reproducible():
    env = BanditEnv(means=(0.9, 0.5))
    sched = Schedule(K=2, delta_min=env.delta_min)
    a = run_ensemble(env, sched, horizon=500, seeds=50, seed=7)
    b = run_ensemble(env, sched, horizon=500, seeds=50, seed=7)
    assert np.array_equal(a.cumulative_regret, b.cumulative_regret)
    assert np.array_equal(a.mean_inst_regret, b.mean_inst_regret)


def test_cumulative_regret_monotone():
    env = BanditEnv(means=(0.9, 0.5))
    sched = Schedule(K=2, delta_min=env.delta_min)
    res = run_ensemble(env, sched, horizon=1000, seeds=100, seed=3)
    diffs = np.diff(res.cumulative_regret)
    assert (diffs >= -1e-12).all()


def test_one_step_bound_holds_small_scale():
    env = BanditEnv(means=(0.9, 0.5))
    sched = Schedule(K=2, delta_min=env.delta_min)
    res = run_ensemble(env, sched, horizon=2000, seeds=300, seed=11)
    rep = one_step_report(res)
    for child in rep.children:
        assert child.own_verdict == "holds", child.summary_line()


def test_bound_value_decreases_eventually():
    env = BanditEnv(means=(0.9, 0.5))
    sched = Schedule(K=2, delta_min=env.delta_min)
    assert one_step_bound_value(env, sched, 10 ** 4) < \
        one_step_bound_value(env, sched, 10 ** 2)


def test_constant_schedule_linear_regret():
    env = BanditEnv(means=(0.9, 0.5))
    sched = Schedule(K=2, delta_min=env.delta_min, kind="constant")
    res = run_ensemble(env, sched, horizon=3000, seeds=100, seed=5)
    assert regret_exponent(res) > 0.85


def test_square_transfer_hand_joint():
    # X = +-1 revealed by U exactly: I = log 2 dominates the lhs
    atoms = [((0, u, float(2 * u - 1)), 0.5) for u in (0, 1)]
    j = DiscreteJoint(("g", "u", "x"), atoms)
    margin = square_transfer_margin(j, b=1.0)
    expected = 1.5 + 20.0 * math.log(2) - 1.0
    assert margin == pytest.approx(expected, abs=1e-12)


def test_square_transfer_sweep_small():
    rep = square_transfer_sweep(num=2000, seed=1)
    assert rep.extras["violations"] == 0
    assert rep.verdict == "holds"
