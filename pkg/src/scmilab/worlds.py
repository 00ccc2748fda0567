"""World and learner specifications for sequential paired-sample experiments.

A *world* is a finite outcome space plus a row kernel producing, at each
round, a probability table over ordered pairs ``(z0, z1)`` given the learner
history.  A *learner* is an update kernel over a finite state set driven by
the selected coordinate only, a predictable weight rule, and a loss.

Histories are canonicalized as ordered tuples of per-round records of the
retained selected-path variables (default ``("z", "w")``), which keeps them
hashable and the enumeration finite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .errors import ValidationError

TABLE_TOL = 1e-12

__all__ = [
    "OutcomeSpace",
    "RowKernel",
    "LearnerSpec",
    "WorldSpec",
    "Transcript",
    "RoundRecord",
    "table_learner",
    "memorize_last_learner",
    "constant_learner",
    "mismatch_loss",
    "random_world",
    "RandomWorld",
]


@dataclass(frozen=True)
class OutcomeSpace:
    """The finite data space; atoms are arbitrary hashable labels."""

    atoms: tuple
    loss_grid: tuple | None = None

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("outcome space must be non-empty")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValidationError("outcome atoms must be unique")


def _check_table(table: Mapping, what: str) -> None:
    total = sum(table.values())
    if abs(float(total) - 1.0) > TABLE_TOL:
        raise ValidationError(f"{what} sums to {float(total)!r}, not 1")
    if any(float(p) < 0 for p in table.values()):
        raise ValidationError(f"{what} has a negative entry")


class RowKernel:
    """History-indexed probability tables over ordered outcome pairs.

    ``tables`` maps a history key (produced by ``key_fn``) to a pair table;
    missing keys fall back to ``default``.  The ``exchangeable`` and
    ``conditional_product`` flags are declared by the caller and verified
    against every provided table.
    """

    def __init__(self, default: Mapping, tables: Mapping | None = None,
                 key_fn: Callable | None = None,
                 exchangeable: bool = False,
                 conditional_product: bool = False):
        self.default = dict(default)
        self.tables = {k: dict(v) for k, v in (tables or {}).items()}
        self.key_fn = key_fn
        self.exchangeable = exchangeable
        self.conditional_product = conditional_product
        for tab in [self.default, *self.tables.values()]:
            _check_table(tab, "row kernel table")
            if exchangeable:
                for (a, b), p in tab.items():
                    q = tab.get((b, a), 0)
                    if abs(float(p) - float(q)) > TABLE_TOL:
                        raise ValidationError(
                            f"declared exchangeable but P{(a, b)} != P{(b, a)}")
            if conditional_product:
                marg = self._marginal0(tab)
                for (a, b), p in tab.items():
                    prod = marg.get(a, 0) * marg.get(b, 0)
                    if abs(float(p) - float(prod)) > 1e-9:
                        raise ValidationError(
                            "declared conditional-product but table is not a product")

    @staticmethod
    def _marginal0(table: Mapping) -> dict:
        marg: dict = {}
        for (a, _b), p in table.items():
            marg[a] = marg.get(a, 0) + p
        return marg

    def table(self, hist: tuple) -> dict:
        if self.key_fn is not None:
            key = self.key_fn(hist)
            if key in self.tables:
                return self.tables[key]
        return self.default

    def marginal0(self, hist: tuple) -> dict:
        """First-coordinate marginal of the pair table at this history.

        Under the conditional-product flag this is the per-coordinate law.
        """
        return self._marginal0(self.table(hist))


@dataclass(frozen=True)
class WorldSpec:
    space: OutcomeSpace
    row_kernel: RowKernel


@dataclass
class LearnerSpec:
    """Finite-state learner: update kernel, predictable weight rule, loss.

    ``update(hist, z)`` returns a probability table over states given the
    current history and the *selected* coordinate only.  ``weight(t, hist)``
    must depend on the round index and prior history only (predictability is
    structural: the current row is not an argument).
    """

    states: tuple
    update: Callable[[tuple, object], Mapping]
    loss: Callable[[object, object], object]
    weight: Callable[[int, tuple], object] = lambda t, hist: 1
    retained: tuple = ("z", "w")
    init_history: tuple = ()

    def record(self, *, z, w, q, u) -> tuple:
        values = {"z": z, "w": w, "q": q, "u": u}
        unknown = set(self.retained) - set(values)
        if unknown:
            raise ValidationError(f"unknown retained variables: {sorted(unknown)}")
        return tuple(values[v] for v in self.retained)

    def last(self, hist: tuple, var: str, default=None):
        if var not in self.retained:
            return default
        if len(hist) <= len(self.init_history):
            return default
        return hist[-1][self.retained.index(var)]


# -- reference learners ----------------------------------------------------

def mismatch_loss(w, z):
    """0/1 loss 1{w != z}."""
    return 0 if w == z else 1


def table_learner(states: Sequence, init_state, update_table: Mapping,
                  loss, weight=None, retained: tuple = ("z", "w")) -> LearnerSpec:
    """Markov learner: the update law depends on (previous state, selected z).

    ``update_table`` maps ``(prev_state, z)`` to a state table (or a bare
    state for deterministic updates).
    """
    states = tuple(states)
    if "w" not in retained:
        raise ValidationError("table learner needs the state retained in history")
    norm_table = {}
    for key, val in update_table.items():
        tab = val if isinstance(val, Mapping) else {val: 1}
        _check_table(tab, f"update table at {key}")
        norm_table[key] = dict(tab)

    spec = LearnerSpec(states=states, update=None, loss=loss, retained=retained)

    def update(hist, z):
        prev = spec.last(hist, "w", init_state)
        return norm_table[(prev, z)]

    spec.update = update
    if weight is not None:
        spec.weight = weight
    return spec


def memorize_last_learner(space: OutcomeSpace, init_state="w0",
                          loss=mismatch_loss) -> LearnerSpec:
    """State is a copy of the last selected outcome."""
    return LearnerSpec(
        states=(init_state,) + tuple(space.atoms),
        update=lambda hist, z: {z: 1},
        loss=loss,
    )


def constant_learner(state, loss, weight=None) -> LearnerSpec:
    """Data-independent learner: the state never moves."""
    spec = LearnerSpec(states=(state,), update=lambda hist, z: {state: 1}, loss=loss)
    if weight is not None:
        spec.weight = weight
    return spec


# -- transcripts -----------------------------------------------------------

@dataclass(frozen=True)
class RoundRecord:
    z0: object
    z1: object
    u: int
    q: object
    w: object
    loss_selected: object
    loss_ghost: object


@dataclass(frozen=True)
class Transcript:
    rounds: tuple
    seed: int
    replica: int
    init_history: tuple = ()


# -- random world generation ----------------------------------------------

@dataclass(frozen=True)
class RandomWorld:
    world: WorldSpec
    learner: LearnerSpec
    n: int
    descriptor: dict = field(hash=False, default_factory=dict)


def _frac_dist(rng: random.Random, keys: Sequence, grain: int = 8,
               allow_zero: bool = True) -> dict:
    """Random exact-rational distribution over ``keys``."""
    while True:
        weights = [rng.randrange(0 if allow_zero else 1, grain + 1) for _ in keys]
        total = sum(weights)
        if total > 0:
            break
    return {k: Fraction(w, total) for k, w in zip(keys, weights) if w > 0}


def _pair_table(rng: random.Random, atoms, exchangeable: bool,
                conditional_product: bool, force_asymmetric: bool) -> dict:
    if conditional_product:
        marg = _frac_dist(rng, atoms, allow_zero=False)
        return {(a, b): pa * pb for a, pa in marg.items() for b, pb in marg.items()}
    pairs = [(a, b) for a in atoms for b in atoms]
    for _ in range(200):
        raw = _frac_dist(rng, pairs)
        if exchangeable:
            sym = {}
            for (a, b), p in raw.items():
                q = raw.get((b, a), Fraction(0))
                sym[(a, b)] = (p + q) / 2
                sym[(b, a)] = (p + q) / 2
            table = {k: v for k, v in sym.items() if v > 0}
        else:
            table = raw
        asymmetric = any(table.get((a, b), 0) != table.get((b, a), 0)
                         for a, b in pairs)
        if not force_asymmetric or asymmetric:
            return table
    raise ValidationError("failed to generate an asymmetric pair table")


def random_world(seed: int, *, exchangeable: bool | None = None,
                 conditional_product: bool = False,
                 force_asymmetric: bool = False,
                 max_n: int = 4, max_atoms: int = 3, max_states: int = 4,
                 atom_budget: int = 30000) -> RandomWorld:
    """Seeded generator of small exact-enumerable worlds.

    ``exchangeable=None`` flips a fair coin; ``force_asymmetric`` guarantees a
    genuinely non-exchangeable kernel (for the two-coordinate identity tests).
    The generated world's worst-case enumeration size is kept within
    ``atom_budget`` by shrinking the horizon and forcing deterministic
    updates when necessary.
    """
    rng = random.Random(seed)
    if force_asymmetric:
        exchangeable = False
    if exchangeable is None:
        exchangeable = rng.random() < 0.5
    n = rng.randint(1, max_n)
    n_atoms = rng.randint(2, max_atoms)
    n_states = rng.randint(1, max_states)
    atoms = tuple(f"z{i}" for i in range(n_atoms))
    states = tuple(f"w{i}" for i in range(n_states))
    space = OutcomeSpace(atoms=atoms)

    history_dependent = rng.random() < 0.5
    make = lambda: _pair_table(rng, atoms, exchangeable, conditional_product,
                               force_asymmetric)
    default = make()
    tables = {}
    key_fn = None
    if history_dependent and not conditional_product:
        tables = {a: make() for a in atoms}
        key_fn = None  # bound below, after the learner fixes the layout

    stochastic_update = rng.random() < 0.5
    # keep worst-case enumeration size within budget
    while True:
        pair_support = max(len(default), *(len(t) for t in tables.values())) \
            if tables else len(default)
        state_branch = min(n_states, 2) if stochastic_update else 1
        worst = (pair_support * 2 * state_branch) ** n
        if worst <= atom_budget:
            break
        if stochastic_update:
            stochastic_update = False
        elif n > 1:
            n -= 1
        else:
            raise ValidationError("cannot fit world within atom budget")

    update_table = {}
    for prev in (None, *states):
        for z in atoms:
            if stochastic_update:
                support = rng.sample(states, min(2, n_states))
                update_table[(prev, z)] = _frac_dist(rng, support, allow_zero=False)
            else:
                update_table[(prev, z)] = {rng.choice(states): Fraction(1)}

    grain = 8
    loss_table = {(w, z): Fraction(rng.randint(0, grain), grain)
                  for w in states for z in atoms}

    weight_kind = rng.choice(["one", "constant", "per_round", "last_z"])
    if weight_kind == "one":
        weight = lambda t, hist: Fraction(1)
    elif weight_kind == "constant":
        c = Fraction(rng.randint(1, 4), 4)
        weight = lambda t, hist: c
    elif weight_kind == "per_round":
        cs = [Fraction(rng.randint(0, 4), 4) for _ in range(n + 1)]
        weight = lambda t, hist: cs[t - 1]
    else:
        by_z = {z: Fraction(rng.randint(0, 4), 4) for z in atoms}
        first = Fraction(rng.randint(1, 4), 4)
        weight = None  # closed over the learner below

    init_state = None
    learner = LearnerSpec(
        states=states,
        update=None,
        loss=lambda w, z: loss_table[(w, z)],
    )
    learner.update = lambda hist, z, _t=update_table, _s=learner: \
        _t[(_s.last(hist, "w", init_state), z)]
    if weight_kind == "last_z":
        learner.weight = lambda t, hist, _s=learner: (
            first if _s.last(hist, "z") is None else by_z[_s.last(hist, "z")])
    else:
        learner.weight = weight

    if tables:
        key_fn = lambda hist, _s=learner: _s.last(hist, "z")
    kernel = RowKernel(default, tables=tables, key_fn=key_fn,
                       exchangeable=exchangeable,
                       conditional_product=conditional_product)
    descriptor = {
        "seed": seed,
        "n": n,
        "atoms": list(atoms),
        "states": list(states),
        "exchangeable": exchangeable,
        "conditional_product": conditional_product,
        "history_dependent": bool(tables),
        "stochastic_update": stochastic_update,
        "weight_kind": weight_kind,
    }
    return RandomWorld(WorldSpec(space, kernel), learner, n, descriptor)
