import math

import pytest

from scmilab.bandit import BanditEnv, Schedule
from scmilab.bandit_exact import enumerate_paired_bandit, exact_bandit_report
from scmilab.errors import EnumerationTooLarge, ValidationError


@pytest.fixture(scope="module")
def env():
    return BanditEnv(means=(0.9, 0.5))


@pytest.fixture(scope="module")
def schedule(env):
    return Schedule(K=2, delta_min=env.delta_min)


def test_env_validation():
    with pytest.raises(ValidationError):
        BanditEnv(means=(0.5,))
    with pytest.raises(ValidationError):
        BanditEnv(means=(0.7, 0.7))
    with pytest.raises(ValidationError):
        BanditEnv(means=(1.2, 0.5))


def test_env_gap_structure(env):
    assert env.K == 2
    assert env.best == 0
    assert env.gaps == (0.0, pytest.approx(0.4))
    assert env.delta_min == pytest.approx(0.4)


def test_schedule_monotone_and_floored(env, schedule):
    prev = 1.0
    for t in range(1, 50):
        e = schedule.eps(t)
        assert 0.0 < e <= 0.5
        assert e <= prev + 1e-15
        prev = e
        assert schedule.gamma(t) == pytest.approx(
            2.0 * math.log(2) / (2 * e))


def test_enumeration_limits(env, schedule):
    with pytest.raises(ValidationError):
        enumerate_paired_bandit(env, schedule, 4)
    with pytest.raises(EnumerationTooLarge):
        enumerate_paired_bandit(env, schedule, 3, cap=100)


def test_enumeration_mass_and_selector(env, schedule):
    j = enumerate_paired_bandit(env, schedule, 2)
    assert float(j.total()) == pytest.approx(1.0, abs=1e-12)
    m = {k: v for k, v in j.marginal("u1").atoms}
    assert m[(0,)] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_exact_report_all_checks_hold(env, schedule, t):
    rep = exact_bandit_report(env, schedule, t)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


def test_identity_children_are_exact(env, schedule):
    rep = exact_bandit_report(env, schedule, 2)
    for item in rep.walk():
        if item.rhs_terms and item.rhs_terms[0][0] == "identity_slack":
            assert item.lhs < 1e-10, item.summary_line()


def test_budget_below_log_arms(env, schedule):
    rep = exact_bandit_report(env, schedule, 3)
    assert rep.extras["budget_total"] <= math.log(2) + 1e-10
    assert rep.extras["ordinary_info"] <= math.log(2) + 1e-10


def test_constant_schedule_also_holds(env):
    sched = Schedule(K=2, delta_min=env.delta_min, kind="constant")
    rep = exact_bandit_report(env, sched, 2)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()
