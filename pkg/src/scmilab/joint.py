"""Exact finite probability tables over labeled random elements.

A :class:`DiscreteJoint` is the substrate for every exact expectation and
information measure in the package: a list of ``(atom tuple, probability)``
pairs together with a schema naming each coordinate.  Probabilities may be
floats or :class:`fractions.Fraction` (exact-rational mode).
"""

from __future__ import annotations

import csv
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import SchemaError, ValidationError

CLOSURE_TOL = 1e-12

__all__ = ["DiscreteJoint", "CLOSURE_TOL"]


class DiscreteJoint:
    """A finite joint law with named coordinates.

    Atom values must be hashable; tuples are used for composite coordinates
    such as conditioning contexts.
    """

    __slots__ = ("schema", "atoms", "meta", "_index")

    def __init__(self, schema: Sequence[str], atoms, meta: dict | None = None,
                 check: bool = True):
        self.schema = tuple(schema)
        if len(set(self.schema)) != len(self.schema):
            raise SchemaError(f"duplicate coordinate names in schema: {self.schema}")
        self.atoms = list(atoms)
        self.meta = dict(meta or {})
        self._index = {name: i for i, name in enumerate(self.schema)}
        if check:
            self.validate()

    # -- basic accessors ---------------------------------------------------

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"coordinate {name!r} not in schema {self.schema}") from None

    def indices(self, names) -> tuple[int, ...]:
        if isinstance(names, str):
            names = (names,)
        return tuple(self.index(n) for n in names)

    def __len__(self) -> int:
        return len(self.atoms)

    def total(self):
        return sum(p for _, p in self.atoms)

    def validate(self) -> None:
        for values, p in self.atoms:
            if len(values) != len(self.schema):
                raise ValidationError("atom arity does not match schema")
            if p < 0:
                raise ValidationError(f"negative probability {p}")
        tot = self.total()
        if abs(float(tot) - 1.0) > CLOSURE_TOL:
            raise ValidationError(f"probabilities sum to {float(tot)!r}, not 1")

    # -- functional operations --------------------------------------------

    def expectation(self, fn: Callable[[tuple], float]):
        """Exact expectation of ``fn(atom)``."""
        return sum(p * fn(values) for values, p in self.atoms)

    def column_expectation(self, name: str):
        i = self.index(name)
        return sum(p * values[i] for values, p in self.atoms)

    def marginal(self, names) -> "DiscreteJoint":
        """Marginal joint over a subset of coordinates (atoms merged)."""
        idx = self.indices(names)
        table: dict[tuple, object] = {}
        for values, p in self.atoms:
            key = tuple(values[i] for i in idx)
            table[key] = table.get(key, 0) + p
        schema = (names,) if isinstance(names, str) else tuple(names)
        return DiscreteJoint(schema, list(table.items()), meta=self.meta, check=False)

    def add_columns(self, names: Sequence[str],
                    fn: Callable[[tuple], tuple]) -> "DiscreteJoint":
        """Return a new joint with extra derived coordinates.

        ``fn`` maps an atom tuple to the tuple of new values, evaluated
        per atom; probabilities are unchanged.
        """
        new_schema = self.schema + tuple(names)
        new_atoms = [(values + tuple(fn(values)), p) for values, p in self.atoms]
        return DiscreteJoint(new_schema, new_atoms, meta=self.meta, check=False)

    def group_by(self, names) -> dict[tuple, list[tuple]]:
        """Map each conditioning value to its list of ``(atom, prob)`` pairs."""
        idx = self.indices(names)
        groups: dict[tuple, list] = {}
        for values, p in self.atoms:
            key = tuple(values[i] for i in idx)
            groups.setdefault(key, []).append((values, p))
        return groups

    def to_float(self) -> "DiscreteJoint":
        """Convert exact-rational probabilities to floats."""
        atoms = [(values, float(p)) for values, p in self.atoms]
        meta = dict(self.meta)
        meta["mode"] = "float"
        return DiscreteJoint(self.schema, atoms, meta=meta, check=False)

    # -- CSV interface -----------------------------------------------------

    def to_csv(self, path) -> None:
        """Write the table with a header row naming schema coordinates."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.schema) + ["probability"])
            for values, p in self.atoms:
                writer.writerow([_render(v) for v in values] + [_render(p)])

    @classmethod
    def from_csv(cls, path) -> "DiscreteJoint":
        """Read a table written by :meth:`to_csv`.

        Values round-trip as strings (composite tuples included), which is
        sufficient for marginalization and information measures.
        """
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[-1] != "probability":
                raise ValidationError("missing probability column")
            schema = tuple(header[:-1])
            atoms = []
            for row in reader:
                *values, p = row
                atoms.append((tuple(values), _parse_number(p)))
        return cls(schema, atoms)


def _render(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_number(text: str):
    if "/" in text:
        return Fraction(text)
    return float(text)
