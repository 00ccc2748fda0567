import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scmilab.bounds import (BernsteinParams, BoundReport, bernstein_bound,
                            bernstein_lambda, psi_b, shifted_comparison_bound,
                            slow_rate_bound, sqrt_clamped, stopping_bound,
                            two_coordinate_bound)
from scmilab.enumeration import enumerate_joint
from scmilab.worlds import (OutcomeSpace, RowKernel, WorldSpec,
                            constant_learner, memorize_last_learner,
                            mismatch_loss, random_world)


def test_sqrt_clamped():
    assert sqrt_clamped(-1e-15) == 0.0
    assert sqrt_clamped(4.0) == 2.0


def test_psi_values():
    assert math.isclose(psi_b(1.0, 1.0), math.e - 2.0, abs_tol=1e-12)
    assert psi_b(0.5, 0.0) == 0.125


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 2.9), st.floats(0.0, 1.0))
def test_psi_envelope(lam, b):
    if lam * b < 3.0:
        envelope = lam * lam / (2.0 * (1.0 - lam * b / 3.0))
        assert psi_b(lam, b) <= envelope * (1.0 + 1e-9) + 1e-12


def test_bernstein_lambda_value():
    assert math.isclose(bernstein_lambda(0.5, 1.0, 1.0), 3.0 / 7.0)


def test_report_margin_and_verdicts():
    r = BoundReport(name="x", lhs=1.0, rhs_terms=[("a", 0.6), ("b", 0.5)])
    assert math.isclose(r.margin, 0.1)
    assert r.verdict == "holds"
    bad = BoundReport(name="x", lhs=1.0, rhs_terms=[("a", 0.5)])
    assert bad.verdict == "violated"
    mc_ok = BoundReport(name="m", lhs=1.0, rhs_terms=[("a", 0.9)],
                        mode="plug-in", stderr=0.05)
    assert mc_ok.verdict == "holds"  # within four standard errors
    mc_bad = BoundReport(name="m", lhs=1.0, rhs_terms=[("a", 0.9)],
                         mode="plug-in", stderr=0.01)
    assert mc_bad.verdict == "violated"


def test_children_aggregate_worst():
    child = BoundReport(name="c", lhs=1.0, rhs_terms=[("a", 0.0)])
    parent = BoundReport(name="p", lhs=0.0, rhs_terms=[("a", 1.0)],
                         children=[child])
    assert parent.own_verdict == "holds"
    assert parent.verdict == "violated"
    inc = BoundReport(name="i", lhs=0.0, rhs_terms=[("a", 0.0)],
                      inconclusive_reason="premise")
    assert BoundReport(name="p2", lhs=0.0, rhs_terms=[("a", 1.0)],
                       children=[inc]).verdict == "inconclusive"


def _joint(seed):
    rw = random_world(seed)
    return rw, enumerate_joint(rw.world, rw.learner, rw.n, exact=True)


@pytest.mark.parametrize("seed", range(8))
def test_slow_rate_holds(seed):
    _, j = _joint(seed)
    rep = slow_rate_bound(j)
    assert rep.verdict == "holds", rep.summary_line()


@pytest.mark.parametrize("seed", range(8))
def test_two_coordinate_chain_holds(seed):
    rw = random_world(seed, force_asymmetric=True)
    j = enumerate_joint(rw.world, rw.learner, rw.n, exact=True)
    rep = two_coordinate_bound(j)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


def test_bernstein_trivial_when_no_excess():
    world = WorldSpec(
        OutcomeSpace(("h", "t")),
        RowKernel({("h", "t"): Fraction(1, 2), ("t", "h"): Fraction(1, 2)},
                  exchangeable=True))
    learner = constant_learner("h", mismatch_loss)
    j = enumerate_joint(world, learner, 2, exact=True)
    rep = bernstein_bound(j, lambda z: mismatch_loss("h", z))
    assert rep.extras["b"] == 0.0
    assert rep.verdict == "holds"


def test_bernstein_reports_empirical_B():
    world = WorldSpec(
        OutcomeSpace(("h", "t")),
        RowKernel({("h", "h"): Fraction(9, 16), ("h", "t"): Fraction(3, 16),
                   ("t", "h"): Fraction(3, 16), ("t", "t"): Fraction(1, 16)},
                  exchangeable=True, conditional_product=True))
    learner = memorize_last_learner(world.space)
    # comparator: always predict the majority coin
    rep = bernstein_bound(enumerate_joint(world, learner, 2, exact=True),
                          lambda z: mismatch_loss("h", z))
    assert rep.extras["B"] >= rep.extras["B_empirical"] > 0.0
    assert 0.0 < rep.extras["lambda"] < 3.0
    names = {c.name for c in rep.children}
    assert "excess-bernstein/half-split" in names
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


def test_shifted_comparison_feasibility_constant():
    # the default pair (C=1, eta=1/8) satisfies exp(2 eta)+exp(-2 eta (C+1)) <= 2
    value = math.exp(0.25) + math.exp(-0.5)
    assert value == pytest.approx(1.890556, abs=1e-6)
    assert value <= 2.0


def test_shifted_comparison_infeasible_pair_marked():
    _, j = _joint(1)
    rep = shifted_comparison_bound(j, C=0.01, eta=5.0)
    assert rep.own_verdict == "inconclusive"


def test_shifted_comparison_out_of_range_losses():
    world = WorldSpec(
        OutcomeSpace(("h", "t")),
        RowKernel({("h", "t"): Fraction(1, 2), ("t", "h"): Fraction(1, 2)},
                  exchangeable=True))
    learner = constant_learner("w", lambda w, z: 2.0)  # losses above 1
    j = enumerate_joint(world, learner, 1)
    rep = shifted_comparison_bound(j)
    assert rep.own_verdict == "inconclusive"


def test_shifted_comparison_zero_train_child():
    world = WorldSpec(
        OutcomeSpace(("h", "t")),
        RowKernel({("h", "h"): Fraction(1, 2), ("t", "t"): Fraction(1, 2)},
                  exchangeable=True))
    learner = memorize_last_learner(world.space)  # memorizer: zero train loss
    j = enumerate_joint(world, learner, 2, exact=True)
    rep = shifted_comparison_bound(j)
    assert any(c.name.endswith("zero-train") for c in rep.children)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


@pytest.mark.parametrize("seed", range(6))
def test_stopping_bound_holds(seed):
    rw = random_world(seed)
    first_atom = rw.world.space.atoms[0]

    def rule(t, hist):
        return t == 1 or (hist and hist[-1][0] == first_atom)

    rep = stopping_bound(rw.world, rw.learner, rule, rw.n, exact=True)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


def test_stopping_all_stopped_is_zero():
    rw = random_world(2)
    rep = stopping_bound(rw.world, rw.learner, lambda t, hist: False, rw.n,
                         exact=True)
    assert rep.extras["cumulative_train"] == 0.0
    assert rep.extras["cumulative_holdout"] == 0.0
    assert rep.verdict == "holds"
