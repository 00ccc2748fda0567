"""Exact enumeration of the joint law of a sequential paired-sample run.

The enumerated table has, for round ``t`` (1-indexed), coordinates::

    g{t}   conditioning context: (history before t, both row coordinates)
    u{t}   fair selector bit
    w{t}   learner state after the update at round t
    za{t}  first row coordinate     zb{t}  second row coordinate
    q{t}   predictable weight
    lp{t}  q * loss(w, za)          lm{t}  q * loss(w, zb)

All identities and information budgets downstream read these columns only.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import EnumerationTooLarge, ExchangeabilityError, ValidationError
from .joint import DiscreteJoint
from .rng import replica_stream
from .worlds import LearnerSpec, RoundRecord, Transcript, WorldSpec

__all__ = [
    "round_schema",
    "budget_names",
    "enumerate_joint",
    "sample_transcripts",
    "sequential_risks",
    "row_swap_correlation",
    "two_coordinate_correlation",
    "conditional_population_risk",
]

ROUND_FIELDS = ("g", "u", "w", "za", "zb", "q", "lp", "lm")


def round_schema(n: int) -> tuple[str, ...]:
    return tuple(f"{f}{t}" for t in range(1, n + 1) for f in ROUND_FIELDS)


def budget_names(n: int, loss_field: str = "lp"):
    """Name lists for the per-round selector-information budget."""
    ts = range(1, n + 1)
    return ([f"{loss_field}{t}" for t in ts],
            [f"u{t}" for t in ts],
            [f"g{t}" for t in ts])


def enumerate_joint(world: WorldSpec, learner: LearnerSpec, n: int, *,
                    cap: int = 10 ** 7, exact: bool = False,
                    selector_bias=None) -> DiscreteJoint:
    """Breadth-first exact enumeration of ``n`` rounds.

    ``exact=True`` keeps every probability a :class:`fractions.Fraction`
    (inputs must then be rational).  ``selector_bias`` overrides the fair
    selector's P(U=0) — a debugging hook for negative-control experiments;
    leave it ``None`` for the fair selector the guarantees assume.
    """
    if n < 1:
        raise ValidationError("need at least one round")
    half = Fraction(1, 2) if exact else 0.5
    if selector_bias is not None:
        p_u0 = Fraction(selector_bias) if exact else float(selector_bias)
    else:
        p_u0 = half
    p_u1 = 1 - p_u0

    def num(x):
        return x if exact else float(x)

    # frontier entries: (values tuple so far, history, probability)
    frontier: dict = {((), learner.init_history): num(1)}
    for t in range(1, n + 1):
        new_frontier: dict = {}
        for (values, hist), prob in frontier.items():
            q = learner.weight(t, hist)
            table = world.row_kernel.table(hist)
            for (za, zb), p_pair in table.items():
                g = (hist, za, zb)
                for u, p_u in ((0, p_u0), (1, p_u1)):
                    if p_u == 0:
                        continue
                    z_sel = za if u == 0 else zb
                    for w, p_w in learner.update(hist, z_sel).items():
                        lp = num(q * learner.loss(w, za))
                        lm = num(q * learner.loss(w, zb))
                        rec = learner.record(z=z_sel, w=w, q=q, u=u)
                        key = (values + (g, u, w, za, zb, num(q), lp, lm),
                               hist + (rec,))
                        p = prob * num(p_pair) * p_u * num(p_w)
                        if key in new_frontier:
                            new_frontier[key] += p
                        else:
                            if len(new_frontier) >= cap:
                                raise EnumerationTooLarge(
                                    t, len(new_frontier) + 1, cap)
                            new_frontier[key] = p
        frontier = new_frontier

    atoms = [(values, p) for (values, _hist), p in frontier.items()]
    meta = {
        "n": n,
        "mode": "exact" if exact else "float",
        "exchangeable": world.row_kernel.exchangeable,
        "conditional_product": world.row_kernel.conditional_product,
        "selector_bias": None if selector_bias is None else float(p_u0),
    }
    return DiscreteJoint(round_schema(n), atoms, meta=meta)


# -- Monte Carlo transcripts ----------------------------------------------

def _draw(rng, dist: dict):
    keys = list(dist)
    probs = [float(dist[k]) for k in keys]
    return keys[rng.choice(len(keys), p=probs)]


def sample_transcripts(world: WorldSpec, learner: LearnerSpec, n: int,
                       reps: int, seed: int) -> list[Transcript]:
    """Simulate ``reps`` independent runs; replica ``r`` uses its own stream."""
    out = []
    for r in range(reps):
        rng = replica_stream(seed, r)
        hist = learner.init_history
        rounds = []
        for t in range(1, n + 1):
            q = learner.weight(t, hist)
            za, zb = _draw(rng, world.row_kernel.table(hist))
            u = int(rng.integers(0, 2))
            z_sel = za if u == 0 else zb
            w = _draw(rng, learner.update(hist, z_sel))
            rounds.append(RoundRecord(
                z0=za, z1=zb, u=u, q=q, w=w,
                loss_selected=q * learner.loss(w, z_sel),
                loss_ghost=q * learner.loss(w, zb if u == 0 else za),
            ))
            hist = hist + (learner.record(z=z_sel, w=w, q=q, u=u),)
        out.append(Transcript(rounds=tuple(rounds), seed=seed, replica=r,
                              init_history=learner.init_history))
    return out


# -- exact risk functionals ------------------------------------------------

def _round_indices(joint: DiscreteJoint, t: int) -> dict:
    return {f: joint.index(f"{f}{t}") for f in ROUND_FIELDS}


def sequential_risks(joint: DiscreteJoint):
    """(train, holdout, gap): averaged selected-path and ghost-path risks."""
    n = joint.meta["n"]
    train = holdout = 0
    for t in range(1, n + 1):
        ix = _round_indices(joint, t)
        sel = joint.expectation(
            lambda v: v[ix["lp"]] if v[ix["u"]] == 0 else v[ix["lm"]])
        gho = joint.expectation(
            lambda v: v[ix["lm"]] if v[ix["u"]] == 0 else v[ix["lp"]])
        train += sel
        holdout += gho
    train /= n
    holdout /= n
    return train, holdout, holdout - train


def row_swap_correlation(joint: DiscreteJoint):
    """(2/n) sum_t E[(2U_t - 1) * lp_t]; valid only for exchangeable rows."""
    if not joint.meta.get("exchangeable"):
        raise ExchangeabilityError(
            "row-swap form requires a verified exchangeable kernel")
    n = joint.meta["n"]
    total = 0
    for t in range(1, n + 1):
        ix = _round_indices(joint, t)
        total += joint.expectation(
            lambda v: (2 * v[ix["u"]] - 1) * v[ix["lp"]])
    return 2 * total / n


def two_coordinate_correlation(joint: DiscreteJoint):
    """(1/n) sum_t E[(2U_t - 1) * (lp_t - lm_t)]; no exchangeability needed."""
    n = joint.meta["n"]
    total = 0
    for t in range(1, n + 1):
        ix = _round_indices(joint, t)
        total += joint.expectation(
            lambda v: (2 * v[ix["u"]] - 1) * (v[ix["lp"]] - v[ix["lm"]]))
    return total / n


def conditional_population_risk(joint: DiscreteJoint, world: WorldSpec,
                                learner: LearnerSpec):
    """(1/n) sum_t E[q_t * E_{z ~ row marginal at H_{t-1}} loss(w_t, z)].

    Meaningful when the kernel factorizes given the history, in which case
    it coincides with the ghost-path holdout risk.
    """
    if not joint.meta.get("conditional_product"):
        raise ExchangeabilityError(
            "population form requires a verified conditional-product kernel")
    n = joint.meta["n"]
    total = 0
    for t in range(1, n + 1):
        ix = _round_indices(joint, t)

        def per_atom(v):
            hist = v[ix["g"]][0]
            marg = world.row_kernel.marginal0(hist)
            return v[ix["q"]] * sum(
                p * learner.loss(v[ix["w"]], z) for z, p in marg.items())

        total += joint.expectation(per_atom)
    return total / n
