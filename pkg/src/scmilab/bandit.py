"""Exploration-mixed exponential-weights bandit: schedules, vectorized
Monte Carlo ensembles, and the moment-transfer sweep.

The policy keeps importance-weighted running reward estimates, plays the
exponential-weights distribution mixed with a uniform exploration floor, and
its per-round expected regret is compared against the one-step bound built
from the exploration and learning-rate schedules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport
from .errors import ValidationError
from .info import conditional_mutual_information
from .joint import DiscreteJoint
from .rng import stream

__all__ = [
    "BanditEnv",
    "Schedule",
    "exp_weights",
    "mix_floor",
    "EnsembleResult",
    "run_ensemble",
    "one_step_report",
    "regret_exponent",
    "square_transfer_sweep",
]

TRANSFER_CONST = 52.0
SQUARE_CONST = 20.0
SQUARE_FACTOR = 1.5


@dataclass(frozen=True)
class BanditEnv:
    """Bernoulli arms with a unique optimal arm."""

    means: tuple

    def __post_init__(self):
        if len(self.means) < 2:
            raise ValidationError("need at least two arms")
        if any(not (0.0 <= m <= 1.0) for m in self.means):
            raise ValidationError("means must lie in [0, 1]")
        top = max(self.means)
        if sum(1 for m in self.means if m == top) != 1:
            raise ValidationError("optimal arm must be unique")

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best(self) -> int:
        return int(np.argmax(self.means))

    @property
    def gaps(self) -> tuple:
        top = max(self.means)
        return tuple(top - m for m in self.means)

    @property
    def delta_min(self) -> float:
        return min(g for g in self.gaps if g > 0.0)


@dataclass(frozen=True)
class Schedule:
    """Exploration floor and learning rate per round.

    ``kind="default"`` uses the gap-adapted decaying floor; ``"constant"``
    keeps the floor at 1/K throughout (the ablation arm, whose regret should
    stay near-linear).
    """

    K: int
    delta_min: float
    kind: str = "default"

    def eps(self, t: int) -> float:
        if t < 1:
            raise ValidationError("rounds are 1-indexed")
        if self.kind == "constant":
            return 1.0 / self.K
        target = math.sqrt(
            TRANSFER_CONST * math.log(self.K) / (self.K * t * self.delta_min))
        return min(1.0 / self.K, target)

    def gamma(self, t: int) -> float:
        return 2.0 * math.log(self.K) / (self.K * self.eps(t))


def exp_weights(gamma: float, rhat: np.ndarray) -> np.ndarray:
    """Row-wise softmax of gamma * rhat, numerically stabilized."""
    z = gamma * np.asarray(rhat, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=-1, keepdims=True)


def mix_floor(rho: np.ndarray, eps: float) -> np.ndarray:
    K = rho.shape[-1]
    return (1.0 - K * eps) * rho + eps


@dataclass
class EnsembleResult:
    env: BanditEnv
    schedule: Schedule
    horizon: int
    seeds: int
    log_times: tuple
    mean_inst_regret: np.ndarray   # at log_times, averaged over seeds
    stderr_inst_regret: np.ndarray
    cumulative_regret: np.ndarray  # full length-T per-round mean, cumsum'd
    extras: dict = field(default_factory=dict)


def _log_times(horizon: int, points: int = 20) -> tuple:
    ts = np.unique(np.geomspace(1, horizon, points).astype(int))
    return tuple(int(t) for t in ts)


def run_ensemble(env: BanditEnv, schedule: Schedule, horizon: int,
                 seeds: int, seed: int = 0,
                 log_times: tuple | None = None) -> EnsembleResult:
    """Vectorized simulation of ``seeds`` independent policy trajectories.

    Only the selected path is simulated: the learner's trajectory law does
    not depend on the proof-side paired draws.  Instantaneous expected regret
    of the deployed policy is recorded every round.
    """
    K = env.K
    gaps = np.asarray(env.gaps)
    means = np.asarray(env.means)
    rng = stream(seed, 2)
    log_times = log_times or _log_times(horizon)
    log_set = set(log_times)

    S = np.zeros((seeds, K))            # importance-weighted reward sums
    inst = np.zeros((horizon + 1, ))    # mean over seeds of Delta(policy_t)
    snap_mean = {}
    snap_err = {}

    rho = np.full((seeds, K), 1.0 / K)
    for t in range(1, horizon + 1):
        eps_t = schedule.eps(t)
        policy = mix_floor(rho, eps_t)
        delta_pi = policy @ gaps
        inst[t] = delta_pi.mean()

        u = rng.random((seeds, 1))
        arms = (policy.cumsum(axis=1) < u).sum(axis=1)
        arms = np.minimum(arms, K - 1)
        rewards = (rng.random(seeds) < means[arms]).astype(float)
        probs = np.take_along_axis(policy, arms[:, None], axis=1)[:, 0]
        np.add.at(S, (np.arange(seeds), arms), rewards / probs)

        rhat = S / t
        rho = exp_weights(schedule.gamma(t), rhat)
        if t in log_set:
            # regret of the policy deployed at round t+1 (time-t estimate)
            eps_next = schedule.eps(t + 1)
            nxt = mix_floor(rho, eps_next) @ gaps
            snap_mean[t] = float(nxt.mean())
            snap_err[t] = float(nxt.std(ddof=1) / math.sqrt(seeds))

    mean_inst = np.array([snap_mean[t] for t in log_times])
    err_inst = np.array([snap_err[t] for t in log_times])
    return EnsembleResult(
        env=env, schedule=schedule, horizon=horizon, seeds=seeds,
        log_times=tuple(log_times),
        mean_inst_regret=mean_inst, stderr_inst_regret=err_inst,
        cumulative_regret=np.cumsum(inst[1:]))


def one_step_bound_value(env: BanditEnv, schedule: Schedule, t: int,
                         info_cap: float | None = None) -> float:
    """Upper bound on the expected regret of the time-t mixed policy; the
    information term is capped by log K unless a tighter value is given."""
    K = env.K
    info = math.log(K) if info_cap is None else info_cap
    return (K * schedule.eps(t + 1)
            + 2.0 * math.log(K) / schedule.gamma(t)
            + TRANSFER_CONST * info / (t * schedule.eps(t) * env.delta_min))


def one_step_report(result: EnsembleResult,
                    info_cap: float | None = None) -> BoundReport:
    """Monte Carlo check of the one-step regret bound at every logged time."""
    children = []
    for i, t in enumerate(result.log_times):
        bound = one_step_bound_value(result.env, result.schedule, t, info_cap)
        children.append(BoundReport(
            name=f"bandit/one-step-t{t}",
            lhs=float(result.mean_inst_regret[i]),
            rhs_terms=[("bound", bound)],
            mode="plug-in", stderr=float(result.stderr_inst_regret[i])))
    return BoundReport(
        name="bandit/one-step", lhs=0.0, rhs_terms=[("none", 0.0)],
        children=children,
        extras={"seeds": result.seeds, "horizon": result.horizon})


def regret_exponent(result: EnsembleResult, window: float = 0.1) -> float:
    """Log-log slope of cumulative regret over the trailing window of
    rounds [window * T, T]."""
    T = result.horizon
    ts = np.arange(1, T + 1)
    mask = ts >= max(2, int(window * T))
    x = np.log(ts[mask])
    y = np.log(np.maximum(result.cumulative_regret[mask], 1e-12))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# -- moment transfer for selector-signed averages -------------------------

def square_transfer_margin(joint: DiscreteJoint, b: float = 1.0) -> float:
    """Margin of E[X^2] <= 1.5 E[X^2 | U=1] + 20 b^2 I(X;U|G) for a joint
    with coordinates (g, u, x) where U is fair given G."""
    ig, iu, ix = joint.index("g"), joint.index("u"), joint.index("x")
    e2 = float(joint.expectation(lambda v: v[ix] ** 2))
    mass1 = sum(float(p) for v, p in joint.atoms if v[iu] == 1)
    e2_cond = sum(float(p) * v[ix] ** 2
                  for v, p in joint.atoms if v[iu] == 1) / mass1
    info = conditional_mutual_information(joint, "x", "u", "g").nats
    return SQUARE_FACTOR * e2_cond + SQUARE_CONST * b * b * info - e2


def _random_square_joint(rng, b: float = 1.0) -> DiscreteJoint:
    n_g = rng.integers(1, 5)
    support = np.array([-b, -b / 2.0, 0.0, b / 2.0, b])
    pg = rng.dirichlet(np.ones(n_g))
    atoms = []
    for g in range(n_g):
        for u in (0, 1):
            px = rng.dirichlet(np.ones(len(support)) * rng.uniform(0.2, 2.0))
            for x, p in zip(support, px):
                atoms.append(((g, u, float(x)),
                              float(pg[g]) * 0.5 * float(p)))
    return DiscreteJoint(("g", "u", "x"), atoms)


def square_transfer_sweep(num: int = 10 ** 4, seed: int = 0,
                          b: float = 1.0) -> BoundReport:
    """Randomized sweep of the moment-transfer inequality over ``num``
    random (G, U, X) joints with |X| <= b and a fair selector."""
    rng = stream(seed, 3)
    worst = math.inf
    violations = 0
    for _ in range(num):
        joint = _random_square_joint(rng, b)
        margin = square_transfer_margin(joint, b)
        worst = min(worst, margin)
        if margin < -1e-10:
            violations += 1
    return BoundReport(
        name="bandit/square-transfer-sweep", lhs=0.0,
        rhs_terms=[("worst_margin", worst)],
        extras={"num": num, "violations": violations, "worst_margin": worst},
        tolerance=1e-10)
