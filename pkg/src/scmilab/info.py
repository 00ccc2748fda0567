"""Entropy, KL divergence, mutual information, and conditional MI on
:class:`~scmilab.joint.DiscreteJoint` tables.

Units are nats throughout (natural log, single constant, never an option:
the bound constants assume one consistent base).  Conventions:
``0 log 0 = 0`` and conditioning atoms with zero mass contribute zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import SchemaError, ValidationError
from .joint import DiscreteJoint

NEG_TOL = 1e-12

__all__ = [
    "InfoValue",
    "entropy",
    "kl_divergence",
    "mutual_information",
    "conditional_mutual_information",
    "scmi_budget",
    "ScmiBudget",
]


@dataclass(frozen=True)
class InfoValue:
    """An information quantity in nats with provenance.

    ``mode`` is ``"exact"`` for table evaluations, ``"plug-in"`` for Monte
    Carlo estimates (which carry a standard error).
    """

    nats: float
    mode: str = "exact"
    stderr: float | None = None

    def __post_init__(self):
        if self.nats < -NEG_TOL:
            raise ValidationError(f"information value {self.nats} below -{NEG_TOL}")
        if self.nats < 0.0:
            object.__setattr__(self, "nats", 0.0)
        if self.mode == "exact" and self.stderr is not None:
            raise ValidationError("exact mode carries no stderr")

    def __float__(self) -> float:
        return self.nats


def _as_dist(table) -> dict:
    """Normalize input to a mapping value -> float probability."""
    if isinstance(table, DiscreteJoint):
        return {v: float(p) for v, p in table.atoms}
    if isinstance(table, dict):
        return {k: float(v) for k, v in table.items()}
    return {i: float(p) for i, p in enumerate(table)}


def entropy(p) -> InfoValue:
    dist = _as_dist(p)
    h = -sum(q * math.log(q) for q in dist.values() if q > 0.0)
    return InfoValue(h)


def kl_divergence(p, q) -> InfoValue:
    """KL(p || q) in nats; +inf when p puts mass outside supp(q)."""
    pd, qd = _as_dist(p), _as_dist(q)
    if set(pd) - set(qd):
        raise SchemaError("support schema mismatch between p and q")
    total = 0.0
    for x, px in pd.items():
        if px <= 0.0:
            continue
        qx = qd[x]
        if qx <= 0.0:
            return InfoValue(math.inf)
        total += px * math.log(px / qx)
    return InfoValue(max(total, 0.0) if total > -NEG_TOL else total)


def _mi_from_pairs(pairs: Sequence[tuple[tuple, object, float]]) -> float:
    """MI of (x, y) from weighted pairs; weights need not sum to 1
    (they are normalized internally)."""
    total = sum(w for _, _, w in pairs)
    if total <= 0.0:
        return 0.0
    joint: dict = {}
    px: dict = {}
    py: dict = {}
    for x, y, w in pairs:
        if w <= 0.0:
            continue
        joint[(x, y)] = joint.get((x, y), 0.0) + w
        px[x] = px.get(x, 0.0) + w
        py[y] = py.get(y, 0.0) + w
    mi = 0.0
    for (x, y), w in joint.items():
        mi += w / total * math.log(w * total / (px[x] * py[y]))
    return max(mi, 0.0)


def mutual_information(joint: DiscreteJoint, x, y) -> InfoValue:
    xi = joint.indices(x)
    yi = joint.indices(y)
    pairs = [
        (tuple(v[i] for i in xi), tuple(v[i] for i in yi), float(p))
        for v, p in joint.atoms
    ]
    return InfoValue(_mi_from_pairs(pairs))


def conditional_mutual_information(joint: DiscreteJoint, x, y, g) -> InfoValue:
    """I(X;Y|G) = sum_g P(g) I(X;Y|G=g), zero-mass atoms contributing 0."""
    xi = joint.indices(x)
    yi = joint.indices(y)
    gi = joint.indices(g)
    groups: dict[tuple, list] = {}
    for v, p in joint.atoms:
        fp = float(p)
        if fp <= 0.0:
            continue
        key = tuple(v[i] for i in gi)
        groups.setdefault(key, []).append(
            (tuple(v[i] for i in xi), tuple(v[i] for i in yi), fp)
        )
    cmi = 0.0
    for pairs in groups.values():
        mass = sum(w for _, _, w in pairs)
        cmi += mass * _mi_from_pairs(pairs)
    return InfoValue(cmi)


@dataclass(frozen=True)
class ScmiBudget:
    """Per-round selector-information terms and their sum."""

    per_round: tuple[InfoValue, ...]

    @property
    def total(self) -> float:
        return sum(v.nats for v in self.per_round)


def scmi_budget(joint: DiscreteJoint, loss_names, selector_names,
                context_names) -> ScmiBudget:
    """Per-round CMI sequence I(loss_t; selector_t | context_t).

    The three name lists must have equal length (one entry per round).
    """
    if not (len(loss_names) == len(selector_names) == len(context_names)):
        raise SchemaError("per-round name lists must have equal length")
    terms = tuple(
        conditional_mutual_information(joint, ln, sn, cn)
        for ln, sn, cn in zip(loss_names, selector_names, context_names)
    )
    return ScmiBudget(terms)
