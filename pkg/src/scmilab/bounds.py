"""Certified bound checks on exactly enumerated sequential joints.

Every checker returns a :class:`BoundReport` whose margin is
``sum(rhs terms) - lhs``; a bound *holds* when the margin is no less than
minus the tolerance (exact mode) or minus four standard errors (plug-in
mode).  Chain inequalities are reported link by link via ``children``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .enumeration import budget_names, enumerate_joint, sequential_risks
from .errors import ValidationError
from .info import conditional_mutual_information, scmi_budget
from .joint import DiscreteJoint
from .worlds import LearnerSpec, WorldSpec

__all__ = [
    "BoundReport",
    "BernsteinParams",
    "sqrt_clamped",
    "psi_b",
    "bernstein_lambda",
    "slow_rate_bound",
    "two_coordinate_bound",
    "bernstein_bound",
    "shifted_comparison_bound",
    "stopping_bound",
]

EXACT_TOL = 1e-10
MARGIN_TOL = 1e-12


def sqrt_clamped(x) -> float:
    """Square root with negatives (numerical CMI noise) clamped to zero."""
    return math.sqrt(max(float(x), 0.0))


def bernstein_lambda(C: float, B: float, b: float) -> float:
    """The tuned inverse-temperature for split parameter C: C / (B + C b / 3)."""
    denom = B + C * b / 3.0
    if denom <= 0.0:
        raise ValidationError("need B + C b / 3 > 0")
    return C / denom


def psi_b(lam: float, b: float) -> float:
    """(e^{lam*b} - lam*b - 1) / b^2, continuously extended to b = 0."""
    if lam < 0 or b < 0:
        raise ValidationError("psi_b needs nonnegative arguments")
    x = lam * b
    if x < 1e-4:  # series evaluation avoids catastrophic cancellation
        return lam * lam * (0.5 + x / 6.0 + x * x / 24.0)
    return (math.expm1(x) - x) / (b * b)


@dataclass
class BoundReport:
    """One checked inequality, possibly with chained sub-inequalities."""

    name: str
    lhs: float
    rhs_terms: list  # list of (label, value)
    mode: str = "exact"  # "exact" | "plug-in"
    stderr: float | None = None
    tolerance: float = EXACT_TOL
    children: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    inconclusive_reason: str | None = None

    @property
    def rhs(self) -> float:
        return sum(v for _, v in self.rhs_terms)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def own_verdict(self) -> str:
        if self.inconclusive_reason is not None:
            return "inconclusive"
        if self.mode == "plug-in":
            slack = 4.0 * (self.stderr or 0.0)
        else:
            slack = self.tolerance
        return "holds" if self.margin >= -slack else "violated"

    @property
    def verdict(self) -> str:
        """Worst verdict over this report and all descendants."""
        order = {"holds": 0, "inconclusive": 1, "violated": 2}
        worst = self.own_verdict
        for child in self.children:
            if order[child.verdict] > order[worst]:
                worst = child.verdict
        return worst

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def summary_line(self) -> str:
        tail = f" [{self.inconclusive_reason}]" if self.inconclusive_reason else ""
        return (f"{self.verdict.upper():12s} {self.name}: "
                f"lhs={self.lhs:.12g} rhs={self.rhs:.12g} "
                f"margin={self.margin:.3e}{tail}")


def _budget(joint: DiscreteJoint, loss_field: str = "lp"):
    return scmi_budget(joint, *budget_names(joint.meta["n"], loss_field))


def _state_budget(joint: DiscreteJoint):
    return scmi_budget(joint, *budget_names(joint.meta["n"], "w"))


# -- slow-rate bounds ------------------------------------------------------

def slow_rate_bound(joint: DiscreteJoint, tolerance: float = EXACT_TOL) -> BoundReport:
    """|holdout - train| against the per-round selector-information budget,
    with the looser state-information form checked as a chained link."""
    n = joint.meta["n"]
    _, _, gap = sequential_risks(joint)
    loss_budget = _budget(joint)
    r1 = (2.0 / n) * sum(sqrt_clamped(2.0 * v.nats) for v in loss_budget.per_round)
    state_budget = _state_budget(joint)
    r2 = 2.0 * sqrt_clamped((2.0 / n) * state_budget.total)
    chain = BoundReport(
        name="slow-rate/state-chain", lhs=r1,
        rhs_terms=[("state_info", r2)], tolerance=tolerance)
    return BoundReport(
        name="slow-rate", lhs=abs(float(gap)),
        rhs_terms=[("loss_info", r1)], tolerance=tolerance,
        children=[chain],
        extras={"gap": float(gap), "budget_total": loss_budget.total})


def two_coordinate_bound(joint: DiscreteJoint,
                         tolerance: float = EXACT_TOL) -> BoundReport:
    """|holdout - train| via the two-coordinate chain, valid without
    exchangeability: difference -> pair -> state -> aggregated state."""
    n = joint.meta["n"]
    _, _, gap = sequential_risks(joint)

    def diff_cols(values):
        out = []
        for t in range(1, n + 1):
            lp = values[joint.index(f"lp{t}")]
            lm = values[joint.index(f"lm{t}")]
            out.append(lp - lm)
        return tuple(out)

    extended = joint.add_columns([f"ld{t}" for t in range(1, n + 1)], diff_cols)
    links = []
    r_diff = r_pair = r_state = 0.0
    state_total = 0.0
    for t in range(1, n + 1):
        u, g = f"u{t}", f"g{t}"
        i_diff = conditional_mutual_information(extended, f"ld{t}", u, g)
        i_pair = conditional_mutual_information(
            extended, (f"lp{t}", f"lm{t}"), u, g)
        i_state = conditional_mutual_information(extended, f"w{t}", u, g)
        r_diff += sqrt_clamped(2.0 * i_diff.nats)
        r_pair += sqrt_clamped(2.0 * i_pair.nats)
        r_state += sqrt_clamped(2.0 * i_state.nats)
        state_total += i_state.nats
    r_diff /= n
    r_pair /= n
    r_state /= n
    r_agg = sqrt_clamped((2.0 / n) * state_total)
    links.append(BoundReport("two-coordinate/pair", r_diff,
                             [("pair_info", r_pair)], tolerance=tolerance))
    links.append(BoundReport("two-coordinate/state", r_pair,
                             [("state_info", r_state)], tolerance=tolerance))
    links.append(BoundReport("two-coordinate/aggregate", r_state,
                             [("aggregate_info", r_agg)], tolerance=tolerance))
    return BoundReport(
        name="two-coordinate", lhs=abs(float(gap)),
        rhs_terms=[("difference_info", r_diff)], tolerance=tolerance,
        children=links, extras={"gap": float(gap)})


# -- fast-rate (variance-weighted) bounds ---------------------------------

@dataclass(frozen=True)
class BernsteinParams:
    """Parameters for the excess-loss variance-weighted bound.

    ``b`` bounds |excess loss|; ``B`` links second moment to holdout excess
    risk.  Declared values are floors: empirical counterparts computed from
    the joint are used when larger.  Either ``lam`` directly or the split
    parameter ``C`` in (0, 1) may be given.
    """

    b: float = 0.0
    B: float = 0.0
    lam: float | None = None
    C: float = 0.5


def _excess_extended(joint: DiscreteJoint, comparator):
    """Add columns ep{t}, em{t}: weighted excess losses on both coordinates."""
    n = joint.meta["n"]

    def cols(values):
        out = []
        for t in range(1, n + 1):
            q = values[joint.index(f"q{t}")]
            za = values[joint.index(f"za{t}")]
            zb = values[joint.index(f"zb{t}")]
            lp = values[joint.index(f"lp{t}")]
            lm = values[joint.index(f"lm{t}")]
            out.append(float(lp) - float(q) * float(comparator(za)))
            out.append(float(lm) - float(q) * float(comparator(zb)))
        return tuple(out)

    names = []
    for t in range(1, n + 1):
        names += [f"ep{t}", f"em{t}"]
    return joint.add_columns(names, cols)


def bernstein_bound(joint: DiscreteJoint, comparator,
                    params: BernsteinParams | None = None,
                    tolerance: float = EXACT_TOL) -> BoundReport:
    """Excess-risk bound against a fixed comparator loss ``comparator(z)``.

    Checks the variance condition empirically, inflates declared (b, B) to
    their empirical values, and reports the main lambda-form plus the
    closed-form splits as children.
    """
    params = params or BernsteinParams()
    n = joint.meta["n"]
    ext = _excess_extended(joint, comparator)

    r_tr = r_ho = second = 0.0
    b_emp = 0.0
    for t in range(1, n + 1):
        iu = ext.index(f"u{t}")
        ie, im = ext.index(f"ep{t}"), ext.index(f"em{t}")
        r_tr += ext.expectation(lambda v: v[ie] if v[iu] == 0 else v[im])
        r_ho += ext.expectation(lambda v: v[im] if v[iu] == 0 else v[ie])
        second += ext.expectation(lambda v: v[ie] ** 2)
        for v, p in ext.atoms:
            if float(p) > 0.0:
                b_emp = max(b_emp, abs(v[ie]), abs(v[im]))
    r_tr /= n
    r_ho /= n
    second /= n
    b = max(params.b, b_emp)

    report = BoundReport(
        name="excess-bernstein", lhs=0.0, rhs_terms=[("trivial", 0.0)],
        tolerance=tolerance,
        extras={"r_tr": r_tr, "r_ho": r_ho, "second_moment": second,
                "b": b, "b_empirical": b_emp})
    if b == 0.0:
        report.extras["note"] = "excess loss identically zero; bound trivial"
        return report

    if r_ho > tolerance:
        b_ratio = second / r_ho
    elif second <= tolerance:
        b_ratio = 0.0
    else:
        report.inconclusive_reason = (
            "variance condition unverifiable: holdout excess <= 0 "
            "with positive second moment")
        return report
    cap_b = max(params.B, b_ratio)
    report.extras["B"] = cap_b
    report.extras["B_empirical"] = b_ratio

    budget = scmi_budget(ext, *budget_names(n, "ep"))
    info = budget.total
    report.extras["budget_total"] = info

    C = params.C
    lam = params.lam if params.lam is not None \
        else bernstein_lambda(C, cap_b, b)
    if not (0.0 < lam < 3.0 / b):
        report.inconclusive_reason = f"lambda {lam} outside (0, 3/b)"
        return report
    coeff = 1.0 - cap_b * lam / (1.0 - lam * b / 3.0)
    if coeff <= 0.0:
        report.inconclusive_reason = f"shrink coefficient {coeff} not positive"
        return report

    report.lhs = coeff * r_ho
    report.rhs_terms = [("train_excess", r_tr),
                        ("info", 2.0 * info / (lam * n))]
    report.extras.update({"lambda": lam, "coefficient": coeff})

    if 0.0 < C < 1.0:
        denom = cap_b + C * b / 3.0
        split = BoundReport(
            name="excess-bernstein/split", lhs=r_ho,
            rhs_terms=[("train_excess", r_tr / (1.0 - C)),
                       ("info", 2.0 * denom * info / (C * (1.0 - C) * n))],
            tolerance=tolerance, extras={"C": C})
        report.children.append(split)
        half = BoundReport(
            name="excess-bernstein/half-split", lhs=r_ho,
            rhs_terms=[("train_excess", 2.0 * r_tr),
                       ("info", 8.0 * (cap_b + b / 6.0) * info / n)],
            tolerance=tolerance)
        report.children.append(half)

    in_unit = all(
        -tolerance <= v[ext.index(f"e{s}{t}")] <= 1.0 + tolerance
        for t in range(1, n + 1) for s in "pm"
        for v, p in ext.atoms if float(p) > 0.0)
    if in_unit and r_tr <= r_ho + tolerance:
        unit = BoundReport(
            name="excess-bernstein/unit-range", lhs=r_ho,
            rhs_terms=[("train_excess", 2.0 * r_tr),
                       ("info", 28.0 * info / (3.0 * n))],
            tolerance=tolerance)
        report.children.append(unit)
    else:
        report.extras["unit_range_skipped"] = (
            "excess outside [0,1] or train above holdout")
    return report


# -- shifted-comparison (fast, low-loss) bounds ---------------------------

def _feasibility_residual(C: float, eta: float) -> float:
    return math.exp(2.0 * eta) + math.exp(-2.0 * eta * (C + 1.0)) - 2.0


def shifted_comparison_bound(joint: DiscreteJoint, C: float = 1.0,
                             eta: float | None = None,
                             tolerance: float = EXACT_TOL) -> BoundReport:
    """Holdout vs inflated train risk for [0,1]-valued weighted losses,
    with the square-root closed form and the zero-train form as children."""
    n = joint.meta["n"]
    if eta is None:
        eta = C / 8.0
    l_tr, l_ho, _ = sequential_risks(joint)
    l_tr, l_ho = float(l_tr), float(l_ho)
    budget = _budget(joint)
    info = budget.total

    report = BoundReport(
        name="shifted-comparison", lhs=l_ho,
        rhs_terms=[("train", (1.0 + C) * l_tr), ("info", info / (eta * n))],
        tolerance=tolerance,
        extras={"C": C, "eta": eta, "budget_total": info,
                "feasibility_residual": _feasibility_residual(C, eta)})

    in_unit = all(
        -tolerance <= float(v[joint.index(f"l{s}{t}")]) <= 1.0 + tolerance
        for t in range(1, n + 1) for s in "pm"
        for v, p in joint.atoms if float(p) > 0.0)
    if not in_unit:
        report.inconclusive_reason = "weighted losses not in [0,1]"
        return report
    if _feasibility_residual(C, eta) > tolerance:
        report.inconclusive_reason = (
            f"(C, eta)=({C}, {eta}) fails the exponential feasibility check")
        return report

    explicit = BoundReport(
        name="shifted-comparison/explicit", lhs=l_ho,
        rhs_terms=[("train", l_tr), ("info", 8.0 * info / n),
                   ("cross", 4.0 * math.sqrt(2.0 * max(l_tr, 0.0) * info / n))],
        tolerance=tolerance)
    report.children.append(explicit)
    if l_tr <= tolerance:
        zero = BoundReport(
            name="shifted-comparison/zero-train", lhs=l_ho,
            rhs_terms=[("info", 2.0 * info / (n * math.log(2.0)))],
            tolerance=tolerance)
        report.children.append(zero)
    return report


# -- stopped runs ----------------------------------------------------------

def stopping_bound(world: WorldSpec, learner: LearnerSpec, stop_rule,
                   n: int, *, cap: int = 10 ** 7, exact: bool = False,
                   tolerance: float = EXACT_TOL) -> BoundReport:
    """Bounds on *cumulative* risks of a run stopped by a predictable rule.

    ``stop_rule(t, hist)`` returns True while the run is still live; it sees
    only the prior history, so the stopping indicator is predictable.  The
    indicator is folded into the round weight, and the cumulative (unaveraged)
    two-sided and fast-rate forms are checked.
    """
    stopped = LearnerSpec(
        states=learner.states,
        update=learner.update,
        loss=learner.loss,
        weight=lambda t, hist: (learner.weight(t, hist)
                                if stop_rule(t, hist) else 0),
        retained=learner.retained,
        init_history=learner.init_history,
    )
    joint = enumerate_joint(world, stopped, n, cap=cap, exact=exact)
    l_tr_avg, l_ho_avg, _ = sequential_risks(joint)
    l_tr = float(l_tr_avg) * n
    l_ho = float(l_ho_avg) * n
    budget = _budget(joint)
    per_round = [v.nats for v in budget.per_round]
    info = budget.total

    two_sided = BoundReport(
        name="stopping/two-sided", lhs=abs(l_ho - l_tr),
        rhs_terms=[("loss_info",
                    2.0 * sum(sqrt_clamped(2.0 * v) for v in per_round))],
        tolerance=tolerance)

    in_unit = all(
        -tolerance <= float(v[joint.index(f"l{s}{t}")]) <= 1.0 + tolerance
        for t in range(1, n + 1) for s in "pm"
        for v, p in joint.atoms if float(p) > 0.0)
    children = [two_sided]
    if in_unit:
        C, eta = 1.0, 1.0 / 8.0
        fast = BoundReport(
            name="stopping/fast", lhs=l_ho,
            rhs_terms=[("train", (1.0 + C) * l_tr), ("info", info / eta)],
            tolerance=tolerance, extras={"C": C, "eta": eta})
        explicit = BoundReport(
            name="stopping/explicit", lhs=l_ho,
            rhs_terms=[("train", l_tr), ("info", 8.0 * info),
                       ("cross",
                        4.0 * math.sqrt(2.0 * max(l_tr, 0.0) * info))],
            tolerance=tolerance)
        children += [fast, explicit]
        if l_tr <= tolerance:
            children.append(BoundReport(
                name="stopping/zero-train", lhs=l_ho,
                rhs_terms=[("info", 2.0 * info / math.log(2.0))],
                tolerance=tolerance))
    report = BoundReport(
        name="stopping", lhs=abs(l_ho - l_tr),
        rhs_terms=[("loss_info", two_sided.rhs)],
        tolerance=tolerance, children=children,
        extras={"cumulative_train": l_tr, "cumulative_holdout": l_ho,
                "budget_total": info,
                "unit_range": in_unit})
    return report
