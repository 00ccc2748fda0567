"""Label-efficient (query-based) runs with importance-weighted risks.

Each round draws two i.i.d. triples (X, Y, V); a predictable query rule maps
the current model and X to a query probability on a uniform coin grid, the
coin V decides whether the label is revealed, and queried examples enter the
training set with inverse-probability weights.  The final model's
importance-weighted risks are compared with its true population risk and the
selector-information bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .bounds import EXACT_TOL, BoundReport, sqrt_clamped
from .errors import EnumerationTooLarge, ValidationError
from .info import _mi_from_pairs, conditional_mutual_information
from .joint import DiscreteJoint

__all__ = [
    "ActiveWorld",
    "weighted_erm",
    "enumerate_active",
    "iw_risks",
    "population_risk",
    "population_identity_report",
    "active_slow_bound",
    "active_fast_bound",
    "query_information_report",
    "passive_rule",
    "constant_rule",
    "acceptance_worlds",
]

ACTIVE_ROUND_FIELDS = ("g", "u", "xa", "ya", "va", "xb", "yb", "vb",
                       "pa", "pb", "qa", "qb")


@dataclass(frozen=True)
class ActiveWorld:
    """Data source, coin grid, query rule, and deterministic learning map.

    ``coin_grid`` of size g puts mass 1/g on each of {1/g, ..., 1}; a query
    probability p with p*g integral then satisfies P(V <= p) = p exactly,
    which the enumerator verifies for every reachable (model, x).
    ``learn`` maps a weighted sample tuple ((z, weight), ...) to a model.
    """

    xy_dist: Mapping
    coin_grid: int
    p_min: Fraction
    loss: Callable
    rule: Callable
    learn: Callable

    def __post_init__(self):
        total = sum(self.xy_dist.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise ValidationError("xy distribution does not sum to 1")
        if self.coin_grid < 1:
            raise ValidationError("coin grid needs at least one atom")
        if not (0 < self.p_min <= 1):
            raise ValidationError("p_min must lie in (0, 1]")

    def query_prob(self, model, x) -> Fraction:
        p = Fraction(self.rule(model, x))
        if not (self.p_min <= p <= 1):
            raise ValidationError(
                f"query probability {p} outside [{self.p_min}, 1]")
        if (p * self.coin_grid).denominator != 1:
            raise ValidationError(
                f"query probability {p} not on the 1/{self.coin_grid} grid")
        return p


def passive_rule(model, x) -> Fraction:
    return Fraction(1)


def constant_rule(p) -> Callable:
    p = Fraction(p)
    return lambda model, x: p


def weighted_erm(hypotheses: tuple, loss: Callable) -> Callable:
    """Deterministic weighted empirical risk minimizer (first-index ties)."""

    def learn(sample: tuple):
        return min(hypotheses,
                   key=lambda w: (sum(weight * loss(w, z)
                                      for z, weight in sample),
                                  hypotheses.index(w)))

    return learn


def _active_schema(n: int) -> tuple:
    per_round = tuple(f"{f}{t}" for t in range(1, n + 1)
                      for f in ACTIVE_ROUND_FIELDS)
    return per_round + ("wn",)


def enumerate_active(world: ActiveWorld, n: int, *, cap: int = 10 ** 7,
                     exact: bool = True) -> DiscreteJoint:
    """Exact joint of an ``n``-round query run, terminal model included.

    Retained history per round: (x, query bit, revealed label or None,
    model); the conditioning context ``g{t}`` is that history plus both of
    the round's triples.
    """
    g = world.coin_grid
    coin = [(Fraction(k, g), Fraction(1, g)) for k in range(1, g + 1)]

    def num(x):
        return x if exact else float(x)

    # frontier: (values, history, weighted sample) -> prob
    frontier: dict = {((), (), ()): num(1)}
    for t in range(1, n + 1):
        new_frontier: dict = {}
        for (values, hist, sample), prob in frontier.items():
            model = world.learn(sample)
            for (xa, ya), pxa in world.xy_dist.items():
                pa = world.query_prob(model, xa)
                for (xb, yb), pxb in world.xy_dist.items():
                    pb = world.query_prob(model, xb)
                    for va, pva in coin:
                        qa = 1 if va <= pa else 0
                        for vb, pvb in coin:
                            qb = 1 if vb <= pb else 0
                            gctx = (hist, (xa, ya, va), (xb, yb, vb))
                            base = prob * num(pxa) * num(pxb) \
                                * num(pva) * num(pvb)
                            for u in (0, 1):
                                x, y = (xa, ya) if u == 0 else (xb, yb)
                                q, p = (qa, pa) if u == 0 else (qb, pb)
                                new_sample = sample + ((((x, y), 1 / p),)
                                                       if q else ())
                                rec = (x, q, y if q else None, model)
                                key = (values + (gctx, u, xa, ya, va,
                                                 xb, yb, vb, num(pa), num(pb),
                                                 qa, qb),
                                       hist + (rec,), new_sample)
                                pr = base * (num(Fraction(1, 2)))
                                if key in new_frontier:
                                    new_frontier[key] += pr
                                else:
                                    if len(new_frontier) >= cap:
                                        raise EnumerationTooLarge(
                                            t, len(new_frontier) + 1, cap)
                                    new_frontier[key] = pr
        frontier = new_frontier

    atoms = []
    for (values, _hist, sample), prob in frontier.items():
        wn = world.learn(sample)
        atoms.append((values + (wn,), prob))
    # merge duplicates created by dropping the raw sample
    merged: dict = {}
    for v, p in atoms:
        merged[v] = merged.get(v, 0) + p
    joint = DiscreteJoint(_active_schema(n), list(merged.items()),
                          meta={"n": n, "p_min": float(world.p_min),
                                "mode": "exact" if exact else "float"})
    return joint


def _iw_terms(joint: DiscreteJoint, world: ActiveWorld, t: int):
    ix = {f: joint.index(f"{f}{t}") for f in ACTIVE_ROUND_FIELDS}
    iw = joint.index("wn")

    def selected(v):
        if v[ix["u"]] == 0:
            q, p, z = v[ix["qa"]], v[ix["pa"]], (v[ix["xa"]], v[ix["ya"]])
        else:
            q, p, z = v[ix["qb"]], v[ix["pb"]], (v[ix["xb"]], v[ix["yb"]])
        return q * world.loss(v[iw], z) / p

    def ghost(v):
        if v[ix["u"]] == 1:
            q, p, z = v[ix["qa"]], v[ix["pa"]], (v[ix["xa"]], v[ix["ya"]])
        else:
            q, p, z = v[ix["qb"]], v[ix["pb"]], (v[ix["xb"]], v[ix["yb"]])
        return q * world.loss(v[iw], z) / p

    return selected, ghost


def iw_risks(joint: DiscreteJoint, world: ActiveWorld):
    """(train, holdout) importance-weighted risks of the final model."""
    n = joint.meta["n"]
    train = holdout = 0
    for t in range(1, n + 1):
        selected, ghost = _iw_terms(joint, world, t)
        train += joint.expectation(selected)
        holdout += joint.expectation(ghost)
    return train / n, holdout / n


def population_risk(joint: DiscreteJoint, world: ActiveWorld):
    """Exact expected population risk of the final model."""
    iw = joint.index("wn")
    return joint.expectation(
        lambda v: sum(p * world.loss(v[iw], z)
                      for z, p in world.xy_dist.items()))


def population_identity_report(joint: DiscreteJoint, world: ActiveWorld,
                               tolerance: float = EXACT_TOL) -> BoundReport:
    """The ghost-path importance-weighted risk equals the population risk."""
    _, holdout = iw_risks(joint, world)
    pop = population_risk(joint, world)
    diff = abs(float(holdout) - float(pop))
    return BoundReport(
        name="query/population-identity", lhs=diff,
        rhs_terms=[("identity_slack", 0.0)], tolerance=tolerance,
        extras={"holdout": float(holdout), "population": float(pop)})


def _loss_budget(joint: DiscreteJoint, world: ActiveWorld):
    """Per-round I(coordinate-0 importance-weighted loss of the final model;
    selector | context)."""
    n = joint.meta["n"]

    def cols(values):
        iw = joint.index("wn")
        out = []
        for t in range(1, n + 1):
            q = values[joint.index(f"qa{t}")]
            p = values[joint.index(f"pa{t}")]
            z = (values[joint.index(f"xa{t}")], values[joint.index(f"ya{t}")])
            out.append(q * world.loss(values[iw], z) / p)
        return tuple(out)

    ext = joint.add_columns([f"Lp{t}" for t in range(1, n + 1)], cols)
    terms = [conditional_mutual_information(ext, f"Lp{t}", f"u{t}", f"g{t}")
             for t in range(1, n + 1)]
    return ext, terms


def active_slow_bound(joint: DiscreteJoint, world: ActiveWorld,
                      tolerance: float = EXACT_TOL) -> BoundReport:
    """|population - train| against the query-weighted information budget."""
    n = joint.meta["n"]
    p_min = float(joint.meta["p_min"])
    train, _ = iw_risks(joint, world)
    pop = population_risk(joint, world)
    _, terms = _loss_budget(joint, world)
    rhs = (2.0 / (p_min * n)) * sum(sqrt_clamped(2.0 * v.nats) for v in terms)
    return BoundReport(
        name="query/slow", lhs=abs(float(pop) - float(train)),
        rhs_terms=[("loss_info", rhs)], tolerance=tolerance,
        extras={"train": float(train), "population": float(pop),
                "budget_total": sum(v.nats for v in terms)})


def active_fast_bound(joint: DiscreteJoint, world: ActiveWorld,
                      C: float = 1.0, eta: float | None = None,
                      tolerance: float = EXACT_TOL) -> BoundReport:
    """Population risk vs inflated importance-weighted train risk, with the
    closed square-root form and the zero-train form as children."""
    n = joint.meta["n"]
    p_min = float(joint.meta["p_min"])
    if eta is None:
        eta = C / 8.0
    train, _ = iw_risks(joint, world)
    train = float(train)
    pop = float(population_risk(joint, world))
    _, terms = _loss_budget(joint, world)
    info = sum(v.nats for v in terms)

    report = BoundReport(
        name="query/fast", lhs=pop,
        rhs_terms=[("train", (1.0 + C) * train),
                   ("info", info / (eta * p_min * n))],
        tolerance=tolerance,
        extras={"C": C, "eta": eta, "budget_total": info})
    residual = math.exp(2.0 * eta) + math.exp(-2.0 * eta * (C + 1.0)) - 2.0
    if residual > tolerance:
        report.inconclusive_reason = "(C, eta) fails the feasibility check"
        return report
    explicit = BoundReport(
        name="query/fast-explicit", lhs=pop,
        rhs_terms=[("train", train), ("info", 8.0 * info / (p_min * n)),
                   ("cross", 4.0 * math.sqrt(
                       2.0 * max(train, 0.0) * info / (p_min * n)))],
        tolerance=tolerance)
    report.children.append(explicit)
    if train <= tolerance:
        report.children.append(BoundReport(
            name="query/fast-zero-train", lhs=pop,
            rhs_terms=[("info",
                        2.0 * info / (p_min * n * math.log(2.0)))],
            tolerance=tolerance))
    return report


def query_information_report(joint: DiscreteJoint, world: ActiveWorld,
                             tolerance: float = EXACT_TOL) -> BoundReport:
    """Per-round identity: the information carried by the importance-weighted
    loss equals the query-gated information of the raw loss, which the final
    model's information dominates."""
    n = joint.meta["n"]
    ext, terms = _loss_budget(joint, world)
    iw = ext.index("wn")

    children = []
    for t in range(1, n + 1):
        ia = ext.index(f"xa{t}")
        ib = ext.index(f"ya{t}")
        raw = ext.add_columns(
            [f"rl{t}"],
            lambda v, ia=ia, ib=ib: (world.loss(v[iw], (v[ia], v[ib])),))
        iqa = raw.index(f"qa{t}")
        iu = raw.index(f"u{t}")
        irl = raw.index(f"rl{t}")

        gated = gated_state = 0.0
        for key, group in raw.group_by(f"g{t}").items():
            mass = sum(float(p) for _, p in group)
            if mass <= 0.0:
                continue
            qa = group[0][0][iqa]
            if qa == 0:
                continue
            sub = [((v[irl],), (v[iu],), float(p)) for v, p in group]
            subw = [((v[iw],), (v[iu],), float(p)) for v, p in group]
            gated += mass * _mi_from_pairs(sub)
            gated_state += mass * _mi_from_pairs(subw)

        lhs = terms[t - 1].nats
        children.append(BoundReport(
            name=f"query/info-identity-{t}", lhs=abs(lhs - gated),
            rhs_terms=[("identity_slack", 0.0)], tolerance=tolerance))
        children.append(BoundReport(
            name=f"query/info-model-cap-{t}", lhs=gated,
            rhs_terms=[("gated_model_info", gated_state)],
            tolerance=tolerance))
    return BoundReport(
        name="query/information", lhs=0.0, rhs_terms=[("none", 0.0)],
        tolerance=tolerance, children=children)


def acceptance_worlds() -> dict:
    """Three small enumerable query worlds: always-query, minimum-rate, and a
    model-dependent rule.  Shared data source, hypotheses, and learner."""
    xy_dist = {(0, 0): Fraction(1, 4), (0, 1): Fraction(1, 8),
               (1, 0): Fraction(1, 8), (1, 1): Fraction(1, 2)}
    hypotheses = ((0, 1), (1, 0))  # label tables indexed by x

    def loss(w, z):
        x, y = z
        return 0 if w[x] == y else 1

    learn = weighted_erm(hypotheses, loss)

    def adaptive_rule(model, x):
        # query harder where the current model predicts the majority label
        return Fraction(1) if model[x] == 1 else Fraction(1, 2)

    common = dict(xy_dist=xy_dist, coin_grid=2, p_min=Fraction(1, 2),
                  loss=loss, learn=learn)
    return {
        "passive": ActiveWorld(rule=passive_rule, **common),
        "minimum-rate": ActiveWorld(rule=constant_rule(Fraction(1, 2)),
                                    **common),
        "adaptive": ActiveWorld(rule=adaptive_rule, **common),
    }
