import math
from fractions import Fraction

import pytest

from scmilab.enumeration import (budget_names, conditional_population_risk,
                                 enumerate_joint, row_swap_correlation,
                                 sample_transcripts, sequential_risks,
                                 two_coordinate_correlation)
from scmilab.errors import EnumerationTooLarge, ExchangeabilityError
from scmilab.worlds import (OutcomeSpace, RowKernel, WorldSpec,
                            constant_learner, memorize_last_learner,
                            mismatch_loss, random_world)


def coin_world(exchangeable=True):
    table = {("h", "h"): Fraction(1, 4), ("h", "t"): Fraction(1, 4),
             ("t", "h"): Fraction(1, 4), ("t", "t"): Fraction(1, 4)}
    kernel = RowKernel(table, exchangeable=exchangeable,
                       conditional_product=True)
    return WorldSpec(OutcomeSpace(("h", "t")), kernel)


def test_total_mass_exact():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 3, exact=True)
    assert j.total() == 1


def test_selector_is_fair_each_round():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 2, exact=True)
    for t in (1, 2):
        m = j.marginal(f"u{t}")
        assert dict(m.atoms) == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}


def test_constant_learner_has_zero_gap():
    world = coin_world()
    learner = constant_learner("h", mismatch_loss)
    j = enumerate_joint(world, learner, 3, exact=True)
    train, holdout, gap = sequential_risks(j)
    assert train == holdout == Fraction(1, 2)
    assert gap == 0


def test_memorizer_oracle_risks():
    # memorize-the-last-coin on fair coins: from round 2 on, the training
    # loss is P(current selected != previous selected) = 1/2, and the
    # first round always mismatches the initial placeholder state.
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 1, exact=True)
    train, holdout, gap = sequential_risks(j)
    # after the update the state equals the selected coin: train loss 0
    assert train == 0
    assert holdout == Fraction(1, 2)
    assert gap == Fraction(1, 2)


def test_identity_row_swap_matches_gap():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 3, exact=True)
    _, _, gap = sequential_risks(j)
    assert gap == row_swap_correlation(j)
    assert gap == two_coordinate_correlation(j)


def test_row_swap_requires_exchangeable_flag():
    table = {("h", "t"): Fraction(3, 4), ("t", "h"): Fraction(1, 4)}
    kernel = RowKernel(table, exchangeable=False)
    world = WorldSpec(OutcomeSpace(("h", "t")), kernel)
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 2, exact=True)
    with pytest.raises(ExchangeabilityError):
        row_swap_correlation(j)
    # the two-coordinate identity still matches
    _, _, gap = sequential_risks(j)
    assert gap == two_coordinate_correlation(j)


def test_population_risk_requires_product_flag():
    rw = random_world(3, force_asymmetric=True)
    j = enumerate_joint(rw.world, rw.learner, rw.n, exact=True)
    with pytest.raises(ExchangeabilityError):
        conditional_population_risk(j, rw.world, rw.learner)


def test_population_risk_matches_holdout():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 3, exact=True)
    _, holdout, _ = sequential_risks(j)
    assert conditional_population_risk(j, world, learner) == holdout


def test_cap_error_names_round():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    with pytest.raises(EnumerationTooLarge) as exc:
        enumerate_joint(world, learner, 3, cap=40)
    assert exc.value.round_index in (1, 2, 3)
    assert exc.value.cap == 40


def test_selector_bias_debug_hook():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 1, selector_bias=0.8)
    m = dict(j.marginal("u1").atoms)
    assert m[(0,)] == pytest.approx(0.8)
    assert j.meta["selector_bias"] == pytest.approx(0.8)


def test_budget_names_shapes():
    losses, selectors, contexts = budget_names(3)
    assert losses == ["lp1", "lp2", "lp3"]
    assert selectors == ["u1", "u2", "u3"]
    assert contexts == ["g1", "g2", "g3"]


def test_transcripts_reproducible_and_consistent():
    rw = random_world(11)
    runs = sample_transcripts(rw.world, rw.learner, rw.n, reps=5, seed=99)
    again = sample_transcripts(rw.world, rw.learner, rw.n, reps=5, seed=99)
    assert runs == again
    for tr in runs:
        assert len(tr.rounds) == rw.n
        for rec in tr.rounds:
            assert rec.u in (0, 1)
            assert 0 <= float(rec.q) <= 1


def test_transcript_means_match_enumeration():
    world = coin_world()
    learner = memorize_last_learner(world.space)
    j = enumerate_joint(world, learner, 2)
    train, _, _ = sequential_risks(j)
    runs = sample_transcripts(world, learner, 2, reps=4000, seed=5)
    mc = sum(float(rec.loss_selected) for tr in runs for rec in tr.rounds) \
        / (2 * len(runs))
    stderr = 0.5 / math.sqrt(2 * len(runs))
    assert abs(mc - float(train)) < 5 * stderr + 1e-9
