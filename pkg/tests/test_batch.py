import math
from fractions import Fraction

import pytest

from scmilab.batch import (BatchWorld, batch_info_bound, batch_risks,
                           enumerate_batch, erm_algorithm, vc_pattern_bound)
from scmilab.errors import EnumerationTooLarge, ValidationError
from scmilab.online import full_class, vc_dimension


def majority_world(k=2):
    atoms = ("a", "b")
    # hypotheses predict a single atom; loss 1 on the other
    hyps = atoms[:k]

    def loss(w, z):
        return 0 if w == z else 1

    dist = {"a": Fraction(3, 4), "b": Fraction(1, 4)}
    return BatchWorld(atom_dist=dist, hypotheses=hyps, loss=loss,
                      algorithm=erm_algorithm(hyps, loss))


def test_atom_dist_must_normalize():
    with pytest.raises(ValidationError):
        BatchWorld(atom_dist={"a": 0.7}, hypotheses=("a",),
                   loss=lambda w, z: 0, algorithm=lambda s: {"a": 1})


def test_erm_tie_break_is_first_index():
    hyps = ("x", "y")
    algo = erm_algorithm(hyps, lambda w, z: 0)  # every hypothesis ties
    assert algo(("a",)) == {"x": 1}


def test_enumeration_mass_and_cap():
    world = majority_world()
    j = enumerate_batch(world, 2, exact=True)
    assert j.total() == 1
    with pytest.raises(EnumerationTooLarge):
        enumerate_batch(world, 3, cap=10)


def test_single_hypothesis_gap_zero():
    world = majority_world(k=1)
    j = enumerate_batch(world, 3, exact=True)
    train, pop, gap = batch_risks(j, world)
    assert math.isclose(train, 0.25, abs_tol=1e-12)
    assert math.isclose(pop, 0.25, abs_tol=1e-12)
    assert abs(gap) < 1e-12
    rep = batch_info_bound(j, world)
    assert rep.rhs == pytest.approx(0.0, abs=1e-9)
    assert rep.verdict == "holds"


def test_erm_overfits_and_bound_holds():
    world = majority_world()
    j = enumerate_batch(world, 3, exact=True)
    train, pop, gap = batch_risks(j, world)
    assert gap > 0.0  # empirical minimizer generalizes worse than it trains
    rep = batch_info_bound(j, world, vc_dim=1)
    for item in rep.walk():
        assert item.own_verdict == "holds", item.summary_line()


def test_vc_pattern_bound_values():
    assert vc_pattern_bound(0, 5) == 0.0
    assert math.isclose(vc_pattern_bound(1, 1),
                        max(2 * math.log(2), math.log(2 * math.e)))
    # large-n regime: the d log(2en/d) branch dominates
    assert math.isclose(vc_pattern_bound(2, 100), 2 * math.log(100 * math.e))
    with pytest.raises(ValidationError):
        vc_pattern_bound(-1, 3)


def test_dimension_cap_with_computed_vc():
    world = majority_world()
    # the induced loss class {z -> 1{w != z}} on two atoms has VC dim 1
    cls = full_class(("a",))
    assert vc_dimension(cls) == 1
    j = enumerate_batch(world, 2, exact=True)
    rep = batch_info_bound(j, world, vc_dim=1)
    cap = [c for c in rep.children if c.name == "batch/dimension-cap"]
    assert cap and cap[0].own_verdict == "holds"
