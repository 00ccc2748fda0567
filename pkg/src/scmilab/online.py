"""Online learning: Gibbs updates, combinatorial dimensions, and the
pattern-based cap on the selector-information budget for realizable runs.

Binary hypothesis classes are finite label tables over a finite domain;
dimensions are computed exactly by recursion, so they double as oracles for
the bound checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Callable

from .bounds import BoundReport, EXACT_TOL, sqrt_clamped
from .enumeration import budget_names, enumerate_joint, sequential_risks
from .errors import ValidationError
from .info import scmi_budget
from .worlds import LearnerSpec, OutcomeSpace, RowKernel, WorldSpec

__all__ = [
    "BinaryClass",
    "singleton_class",
    "full_class",
    "threshold_class",
    "random_class",
    "littlestone_dimension",
    "vc_dimension",
    "pattern_growth_bound",
    "gibbs_learner",
    "online_reports",
    "realizable_instance",
    "RealizableInstance",
    "pattern_budget_report",
]


# -- binary classes and dimensions ----------------------------------------

@dataclass(frozen=True)
class BinaryClass:
    """A finite set of {0,1}-valued functions on a finite domain, stored as
    label vectors aligned with ``domain``."""

    domain: tuple
    hypotheses: frozenset

    def __post_init__(self):
        for h in self.hypotheses:
            if len(h) != len(self.domain):
                raise ValidationError("label vector length != domain size")
            if any(y not in (0, 1) for y in h):
                raise ValidationError("labels must be 0/1")

    def evaluate(self, h: tuple, x) -> int:
        return h[self.domain.index(x)]


def singleton_class(domain) -> BinaryClass:
    domain = tuple(domain)
    return BinaryClass(domain, frozenset({(0,) * len(domain)}))


def full_class(domain) -> BinaryClass:
    domain = tuple(domain)
    return BinaryClass(domain,
                       frozenset(product((0, 1), repeat=len(domain))))


def threshold_class(domain=(1, 2, 3)) -> BinaryClass:
    """Indicators 1{x >= theta} over a totally ordered finite domain."""
    domain = tuple(domain)
    cuts = list(domain) + [max(domain) + 1]
    hyps = {tuple(1 if x >= theta else 0 for x in domain) for theta in cuts}
    return BinaryClass(domain, frozenset(hyps))


def random_class(rng, max_domain: int = 5, max_size: int = 8) -> BinaryClass:
    m = rng.randint(1, max_domain)
    domain = tuple(range(m))
    k = rng.randint(1, min(max_size, 2 ** m))
    all_h = list(product((0, 1), repeat=m))
    return BinaryClass(domain, frozenset(rng.sample(all_h, k)))


@lru_cache(maxsize=None)
def _ldim(hyps: frozenset, m: int) -> int:
    if len(hyps) <= 1:
        return 0
    best = 0
    for x in range(m):
        h0 = frozenset(h for h in hyps if h[x] == 0)
        h1 = frozenset(h for h in hyps if h[x] == 1)
        if h0 and h1:
            best = max(best, 1 + min(_ldim(h0, m), _ldim(h1, m)))
    return best


def littlestone_dimension(cls: BinaryClass) -> int:
    """Exact sequential (mistake-tree) dimension by recursion."""
    return _ldim(cls.hypotheses, len(cls.domain))


def vc_dimension(cls: BinaryClass) -> int:
    """Exact shattering dimension by exhaustive subset search."""
    m = len(cls.domain)
    best = 0
    for d in range(1, m + 1):
        found = False
        for subset in combinations(range(m), d):
            patterns = {tuple(h[i] for i in subset) for h in cls.hypotheses}
            if len(patterns) == 2 ** d:
                found = True
                break
        if found:
            best = d
        else:
            break
    return best


def pattern_growth_bound(d: int, n: int, relaxed: bool = False) -> float:
    """Nat-valued cap on the cumulative selector information of a depth-``d``
    realizable run of length ``n``: the log binomial sum, or its
    ``d log(en/d)`` relaxation."""
    if d < 0 or n < 1:
        raise ValidationError("need d >= 0 and n >= 1")
    if d == 0:
        return 0.0
    k = min(d, n)
    tight = math.log(sum(math.comb(n, i) for i in range(k + 1)))
    if not relaxed:
        return tight
    if d > n:
        return tight
    return d * math.log(math.e * n / d)


# -- Gibbs learner and online reports -------------------------------------

def gibbs_learner(states: tuple, loss: Callable, rate: float,
                  prior: dict | None = None) -> LearnerSpec:
    """Posterior sampling with multiplicative-weights updates: the state law
    after round t is proportional to prior * exp(-rate * cumulative loss on
    the selected outcomes so far, inclusive)."""
    states = tuple(states)
    prior = dict(prior) if prior else {w: 1.0 / len(states) for w in states}

    spec = LearnerSpec(states=states, update=None, loss=loss)

    def update(hist, z):
        zi = spec.retained.index("z")
        seen = [rec[zi] for rec in hist[len(spec.init_history):]] + [z]
        weights = {w: prior[w] * math.exp(-rate * sum(float(loss(w, s))
                                                      for s in seen))
                   for w in states}
        total = sum(weights.values())
        return {w: v / total for w, v in weights.items() if v > 0.0}

    spec.update = update
    return spec


def online_reports(world: WorldSpec, learner: LearnerSpec, n: int, *,
                   cap: int = 10 ** 7,
                   tolerance: float = EXACT_TOL) -> BoundReport:
    """Unit-weight online run: the slow two-sided gap bound plus the
    state-information square-root form for [0,1] losses."""
    for t in (1,):
        if float(learner.weight(t, learner.init_history)) != 1.0:
            raise ValidationError("online reports assume unit weights")
    joint = enumerate_joint(world, learner, n, cap=cap)
    l_tr, l_ho, gap = sequential_risks(joint)
    l_tr, l_ho = float(l_tr), float(l_ho)
    loss_budget = scmi_budget(joint, *budget_names(n, "lp"))
    state_budget = scmi_budget(joint, *budget_names(n, "w"))
    j_w = state_budget.total

    slow = BoundReport(
        name="online/slow", lhs=abs(float(gap)),
        rhs_terms=[("loss_info",
                    (2.0 / n) * sum(sqrt_clamped(2.0 * v.nats)
                                    for v in loss_budget.per_round))],
        tolerance=tolerance)
    explicit = BoundReport(
        name="online/state-explicit", lhs=l_ho,
        rhs_terms=[("train", l_tr), ("info", 8.0 * j_w / n),
                   ("cross", 4.0 * math.sqrt(2.0 * max(l_tr, 0.0) * j_w / n))],
        tolerance=tolerance)
    return BoundReport(
        name="online", lhs=abs(float(gap)), rhs_terms=slow.rhs_terms,
        tolerance=tolerance, children=[slow, explicit],
        extras={"train": l_tr, "holdout": l_ho,
                "loss_budget": loss_budget.total, "state_budget": j_w})


# -- realizable adversarial runs ------------------------------------------

@dataclass(frozen=True)
class RealizableInstance:
    """A scripted adversarial run certified realizable by a binary class.

    ``certificate`` maps every selector path to (coordinate-0 label sequence,
    witness label vector); the witness reproduces the labels at the presented
    points, which is checked at construction time.
    """

    world: WorldSpec
    learner: LearnerSpec
    cls: BinaryClass
    n: int
    certificate: dict


def realizable_instance(cls: BinaryClass, n: int, seed: int = 0) -> RealizableInstance:
    """Build a depth-``n`` scripted run whose per-round selected-path loss is
    realizable by ``cls`` along every selector path.

    At each history the adversary presents a splitting point of the surviving
    hypothesis set when one exists (the selected coordinate's loss then equals
    the selector bit and the set shrinks accordingly); otherwise the surviving
    set is unanimous and the common label is issued.
    """
    import random as _random
    rng = _random.Random(seed)
    m = len(cls.domain)

    # node key: selector prefix tuple; value: (point index or None, F at node)
    nodes: dict = {}
    certificate: dict = {}

    def build(prefix: tuple, hyps: frozenset):
        if len(prefix) == n:
            witness = sorted(hyps)[0]
            labels = []
            walk = ()
            for u in prefix:
                x, f_here, split = nodes[walk]
                labels.append(u if split else sorted(f_here)[0][x])
                walk = walk + (u,)
            certificate[prefix] = (tuple(labels), witness)
            return
        splitting = [x for x in range(m)
                     if any(h[x] == 0 for h in hyps)
                     and any(h[x] == 1 for h in hyps)]
        if splitting:
            x = rng.choice(splitting)
            nodes[prefix] = (x, hyps, True)
            build(prefix + (0,), frozenset(h for h in hyps if h[x] == 0))
            build(prefix + (1,), frozenset(h for h in hyps if h[x] == 1))
        else:
            x = rng.randrange(m)
            nodes[prefix] = (x, hyps, False)
            build(prefix + (0,), hyps)
            build(prefix + (1,), hyps)

    build((), cls.hypotheses)

    # verify the certificate against the class
    for prefix, (labels, witness) in certificate.items():
        walk = ()
        for t, u in enumerate(prefix):
            x, _f, _split = nodes[walk]
            if witness[x] != labels[t]:
                raise ValidationError("realizability certificate failed")
            walk = walk + (u,)

    # realize as a scripted world: rows are distinct per (prefix, coordinate)
    atom = lambda prefix, u: ("r", prefix, u)
    all_prefixes = sorted(nodes, key=lambda p: (len(p), p))
    atoms = tuple(atom(p, u) for p in all_prefixes for u in (0, 1))
    space = OutcomeSpace(atoms=atoms)

    tables = {}
    for p in all_prefixes:
        tables[p] = {(atom(p, 0), atom(p, 1)): 1}
    default = tables[()]

    loss_table = {}
    for p in all_prefixes:
        x, f_here, split = nodes[p]
        for u in (0, 1):
            w = atom(p, u)
            label = u if split else sorted(f_here)[0][x]
            for v in (0, 1):
                loss_table[(w, atom(p, v))] = label

    learner = LearnerSpec(
        states=atoms,
        update=lambda hist, z: {z: 1},
        loss=lambda w, z: loss_table.get((w, z), 0),
    )

    # the prefix is the last selected atom's prefix extended by its bit
    def prefix_key(hist, _spec=learner):
        if not hist:
            return ()
        rec = hist[-1][_spec.retained.index("z")]
        return rec[1] + (rec[2],)

    kernel = RowKernel(default, tables=tables, key_fn=prefix_key,
                       exchangeable=False)
    world = WorldSpec(space, kernel)
    return RealizableInstance(world=world, learner=learner, cls=cls, n=n,
                              certificate=certificate)


def pattern_budget_report(instance: RealizableInstance, *,
                          tolerance: float = EXACT_TOL) -> BoundReport:
    """Exact cumulative selector information of a certified realizable run
    against the dimension-based pattern caps."""
    joint = enumerate_joint(instance.world, instance.learner, instance.n,
                            exact=True)
    budget = scmi_budget(joint, *budget_names(instance.n, "lp"))
    d = littlestone_dimension(instance.cls)
    tight = pattern_growth_bound(d, instance.n)
    relaxed = pattern_growth_bound(d, instance.n, relaxed=True)
    child = BoundReport(
        name="pattern/relaxation", lhs=tight,
        rhs_terms=[("relaxed_cap", relaxed)], tolerance=tolerance)
    return BoundReport(
        name="pattern", lhs=budget.total,
        rhs_terms=[("pattern_cap", tight)], tolerance=tolerance,
        children=[child],
        extras={"dimension": d, "budget_total": budget.total})
