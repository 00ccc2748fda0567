"""Batch (i.i.d. supersample) generalization-gap checks.

A supersample of ``n`` ordered outcome pairs is drawn i.i.d., fair selector
bits pick one coordinate per pair as the training set, an algorithm maps the
training set to a hypothesis, and the expected generalization gap is compared
against per-pair selector-information terms, with the coarser function- and
hypothesis-level forms checked as chained links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

from .bounds import EXACT_TOL, BoundReport, sqrt_clamped
from .errors import EnumerationTooLarge, ValidationError
from .info import conditional_mutual_information
from .joint import DiscreteJoint

__all__ = [
    "BatchWorld",
    "erm_algorithm",
    "enumerate_batch",
    "batch_risks",
    "batch_info_bound",
    "vc_pattern_bound",
]


@dataclass(frozen=True)
class BatchWorld:
    """I.i.d. data source plus a finite hypothesis class and an algorithm.

    ``algorithm`` maps a training tuple to a probability table over
    hypotheses.
    """

    atom_dist: Mapping
    hypotheses: tuple
    loss: Callable
    algorithm: Callable[[tuple], Mapping]

    def __post_init__(self):
        total = sum(self.atom_dist.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise ValidationError("atom distribution does not sum to 1")


def erm_algorithm(hypotheses: tuple, loss: Callable) -> Callable:
    """Deterministic empirical risk minimizer, first-index tie-break."""

    def algorithm(sample: tuple) -> dict:
        best = min(hypotheses,
                   key=lambda w: (sum(loss(w, z) for z in sample),
                                  hypotheses.index(w)))
        return {best: 1}

    return algorithm


def enumerate_batch(world: BatchWorld, n: int, *, cap: int = 10 ** 7,
                    exact: bool = False) -> DiscreteJoint:
    """Exact joint over (supersample, selector bits, hypothesis).

    Columns: ``za{i}``, ``zb{i}``, ``u{i}`` for each pair, ``w``, and ``f``
    (the tuple of losses of ``w`` on all ``2n`` coordinates).
    """
    atoms_z = list(world.atom_dist)
    projected = (len(atoms_z) ** (2 * n)) * (2 ** n)
    if projected > cap:
        raise EnumerationTooLarge(n, projected, cap)
    half = Fraction(1, 2) if exact else 0.5

    def num(x):
        return x if exact else float(x)

    schema = []
    for i in range(1, n + 1):
        schema += [f"za{i}", f"zb{i}"]
    schema += [f"u{i}" for i in range(1, n + 1)] + ["w", "f"]

    atoms = []
    for pairs in product(product(atoms_z, atoms_z), repeat=n):
        p_pairs = num(1)
        for za, zb in pairs:
            p_pairs = p_pairs * num(world.atom_dist[za]) * num(world.atom_dist[zb])
        for bits in product((0, 1), repeat=n):
            sample = tuple(pairs[i][bits[i]] for i in range(n))
            for w, p_w in world.algorithm(sample).items():
                f = tuple(world.loss(w, z)
                          for za, zb in pairs for z in (za,)) + \
                    tuple(world.loss(w, z)
                          for za, zb in pairs for z in (zb,))
                values = []
                for za, zb in pairs:
                    values += [za, zb]
                values += list(bits) + [w, f]
                atoms.append((tuple(values),
                              p_pairs * (half ** n) * num(p_w)))
    joint = DiscreteJoint(schema, atoms,
                          meta={"n": n, "mode": "exact" if exact else "float"})
    return joint


def batch_risks(joint: DiscreteJoint, world: BatchWorld):
    """(train, population, gap) for the enumerated batch joint."""
    n = joint.meta["n"]
    iw = joint.index("w")
    sel_ix = [(joint.index(f"za{i}"), joint.index(f"zb{i}"), joint.index(f"u{i}"))
              for i in range(1, n + 1)]

    def train(v):
        return sum(world.loss(v[iw], v[a] if v[u] == 0 else v[b])
                   for a, b, u in sel_ix) / n

    def population(v):
        return sum(float(p) * world.loss(v[iw], z)
                   for z, p in world.atom_dist.items())

    tr = float(joint.expectation(train))
    pop = float(joint.expectation(population))
    return tr, pop, pop - tr


def vc_pattern_bound(d: int, n: int) -> float:
    """max{(d+1) log 2, d log(2 e n / d)} in nats; zero when d = 0."""
    if d < 0 or n < 1:
        raise ValidationError("need d >= 0 and n >= 1")
    if d == 0:
        return 0.0
    return max((d + 1) * math.log(2.0), d * math.log(2.0 * math.e * n / d))


def batch_info_bound(joint: DiscreteJoint, world: BatchWorld,
                     vc_dim: int | None = None,
                     tolerance: float = EXACT_TOL) -> BoundReport:
    """|population - train| against per-pair selector information, with the
    function-level and hypothesis-level aggregates as chained links and,
    when a VC dimension is supplied, the dimension-based cap on the
    function-level information."""
    n = joint.meta["n"]
    ztilde = [name for i in range(1, n + 1) for name in (f"za{i}", f"zb{i}")]
    u_all = tuple(f"u{i}" for i in range(1, n + 1))
    _, _, gap = batch_risks(joint, world)

    def loss_col(i):
        iw, ia = joint.index("w"), joint.index(f"za{i}")
        return lambda v: (world.loss(v[iw], v[ia]),)

    ext = joint
    for i in range(1, n + 1):
        ext = ext.add_columns([f"li{i}"], loss_col(i))

    per_pair = [conditional_mutual_information(ext, f"li{i}", f"u{i}", ztilde)
                for i in range(1, n + 1)]
    r_main = (2.0 / n) * sum(sqrt_clamped(2.0 * v.nats) for v in per_pair)

    i_f = conditional_mutual_information(ext, "f", u_all, ztilde)
    i_w = conditional_mutual_information(ext, "w", u_all, ztilde)
    lhs_chain = (1.0 / n) * sum(sqrt_clamped(v.nats) for v in per_pair)
    chain_f = BoundReport(
        name="batch/function-chain", lhs=lhs_chain,
        rhs_terms=[("function_info", sqrt_clamped(i_f.nats / n))],
        tolerance=tolerance)
    chain_w = BoundReport(
        name="batch/hypothesis-chain", lhs=sqrt_clamped(i_f.nats / n),
        rhs_terms=[("hypothesis_info", sqrt_clamped(i_w.nats / n))],
        tolerance=tolerance)
    children = [chain_f, chain_w]
    if vc_dim is not None:
        children.append(BoundReport(
            name="batch/dimension-cap", lhs=i_f.nats,
            rhs_terms=[("pattern_cap", vc_pattern_bound(vc_dim, n))],
            tolerance=tolerance))
    return BoundReport(
        name="batch", lhs=abs(gap),
        rhs_terms=[("pair_info", r_main)], tolerance=tolerance,
        children=children,
        extras={"gap": gap, "function_info": i_f.nats,
                "hypothesis_info": i_w.nats})
