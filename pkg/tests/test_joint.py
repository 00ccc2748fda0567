from fractions import Fraction

import pytest

from scmilab.errors import SchemaError, ValidationError
from scmilab.joint import DiscreteJoint


def two_coin():
    return DiscreteJoint(
        ("x", "y"),
        [((0, 0), Fraction(1, 4)), ((0, 1), Fraction(1, 4)),
         ((1, 0), Fraction(1, 4)), ((1, 1), Fraction(1, 4))])


def test_validate_rejects_bad_mass():
    with pytest.raises(ValidationError):
        DiscreteJoint(("x",), [((0,), 0.6), ((1,), 0.6)])
    with pytest.raises(ValidationError):
        DiscreteJoint(("x",), [((0,), -0.5), ((1,), 1.5)])


def test_duplicate_schema_names_rejected():
    with pytest.raises(SchemaError):
        DiscreteJoint(("x", "x"), [((0, 0), 1.0)])


def test_missing_coordinate_raises():
    with pytest.raises(SchemaError):
        two_coin().index("z")


def test_expectation_and_column_expectation():
    j = two_coin()
    assert j.expectation(lambda v: v[0] + v[1]) == 1
    assert j.column_expectation("x") == Fraction(1, 2)


def test_marginal_merges_atoms():
    m = two_coin().marginal("x")
    assert sorted(m.atoms) == [((0,), Fraction(1, 2)), ((1,), Fraction(1, 2))]


def test_add_columns_and_group_by():
    j = two_coin().add_columns(["s"], lambda v: (v[0] ^ v[1],))
    assert j.column_expectation("s") == Fraction(1, 2)
    groups = j.group_by("s")
    assert set(groups) == {(0,), (1,)}
    assert all(len(g) == 2 for g in groups.values())


def test_csv_round_trip_exact(tmp_path):
    path = tmp_path / "joint.csv"
    j = two_coin()
    j.to_csv(path)
    back = DiscreteJoint.from_csv(path)
    assert back.schema == ("x", "y")
    assert back.total() == 1
    # exact fractions survive the round trip
    assert {p for _, p in back.atoms} == {Fraction(1, 4)}


def test_csv_round_trip_float(tmp_path):
    path = tmp_path / "joint.csv"
    j = DiscreteJoint(("x",), [((0,), 0.1), ((1,), 0.9)])
    j.to_csv(path)
    back = DiscreteJoint.from_csv(path)
    probs = sorted(p for _, p in back.atoms)
    assert probs == [0.1, 0.9]


def test_to_float():
    j = two_coin().to_float()
    assert all(isinstance(p, float) for _, p in j.atoms)
    assert j.meta["mode"] == "float"
