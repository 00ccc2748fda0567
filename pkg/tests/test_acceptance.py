"""Acceptance gate: one test (and one printed PASS/FAIL line) per criterion."""

import math
import random
import time

from scmilab.active import (acceptance_worlds, active_fast_bound,
                            active_slow_bound, enumerate_active,
                            population_identity_report,
                            query_information_report)
from scmilab.bandit import (BanditEnv, Schedule, one_step_report,
                            regret_exponent, run_ensemble,
                            square_transfer_sweep)
from scmilab.bandit_exact import exact_bandit_report
from scmilab.batch import batch_info_bound, enumerate_batch
from scmilab.bounds import bernstein_lambda, psi_b
from scmilab.cli import _random_batch_world, main, sweep_world_reports
from scmilab.enumeration import (enumerate_joint, row_swap_correlation,
                                 sequential_risks, two_coordinate_correlation)
from scmilab.info import kl_divergence
from scmilab.online import (full_class, littlestone_dimension,
                            pattern_budget_report, random_class,
                            realizable_instance, singleton_class,
                            threshold_class, vc_dimension)
from scmilab.worlds import random_world

TOL = 1e-10


def _report(number, name, ok):
    print(f"\n[criterion {number}] {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {number} ({name}) failed"


def test_criterion_1_identity_suite():
    t0 = time.perf_counter()
    worst = 0.0
    n_nonexch = 0
    for i in range(200):
        if i < 140:
            rw = random_world(i)
        elif i < 170:
            rw = random_world(i, force_asymmetric=True)
        else:
            rw = random_world(i, conditional_product=True)
        joint = enumerate_joint(rw.world, rw.learner, rw.n, exact=True)
        _, _, gap = sequential_risks(joint)
        worst = max(worst, abs(float(gap - two_coordinate_correlation(joint))))
        if rw.world.row_kernel.exchangeable:
            worst = max(worst,
                        abs(float(gap - row_swap_correlation(joint))))
        else:
            n_nonexch += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= TOL and n_nonexch >= 30 and elapsed <= 120.0
    print(f"\n  worst residual {worst:.2e}, {n_nonexch} non-exchangeable "
          f"worlds, {elapsed:.1f}s")
    _report(1, "identity suite (200 worlds)", ok)


def test_criterion_2_bound_suite():
    t0 = time.perf_counter()
    worst = math.inf
    violations = 0

    def scan(report):
        nonlocal worst, violations
        for item in report.walk():
            if item.inconclusive_reason is not None:
                continue
            worst = min(worst, item.margin)
            if item.margin < -TOL:
                violations += 1

    for seed in range(120):
        for report in sweep_world_reports(seed, TOL):
            scan(report)
    for i in range(6):
        world = _random_batch_world(i)
        scan(batch_info_bound(enumerate_batch(world, 3, exact=True), world))
    for world in acceptance_worlds().values():
        joint = enumerate_active(world, 2)
        scan(active_slow_bound(joint, world))
        scan(active_fast_bound(joint, world))
        scan(query_information_report(joint, world))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and worst >= -TOL and elapsed <= 600.0
    print(f"\n  worst margin {worst:.2e}, {violations} violations, "
          f"{elapsed:.1f}s")
    _report(2, "bound suite", ok)


def test_criterion_3_constants():
    kl = kl_divergence({1: 2 / 3, 0: 1 / 3}, {1: 0.5, 0: 0.5}).nats
    closed = (2 / 3) * math.log(4 / 3) + (1 / 3) * math.log(2 / 3)
    feas = math.exp(0.25) + math.exp(-0.5)
    lam = bernstein_lambda(0.5, 1.0, 1.0)
    coeff = 2.0 * (1.0 + 0.5 / 3.0) / (0.5 * 0.5)
    ok = (abs(kl - closed) <= 1e-9 and abs(kl - 0.056633) <= 1e-6
          and kl > 0.05
          and abs(psi_b(1.0, 1.0) - (math.e - 2.0)) <= 1e-9
          and psi_b(1.0, 1.0) <= 0.75
          and abs(feas - 1.890556) <= 1e-6 and feas <= 2.0
          and abs(lam - 3.0 / 7.0) <= 1e-9
          and abs(coeff - 28.0 / 3.0) <= 1e-9)
    _report(3, "constant checks", ok)


def test_criterion_4_square_transfer_sweep():
    rep = square_transfer_sweep(num=10 ** 4, seed=0)
    ok = rep.extras["violations"] == 0 and rep.verdict == "holds"
    print(f"\n  worst margin {rep.extras['worst_margin']:.3e} "
          f"over {rep.extras['num']} joints")
    _report(4, "moment-transfer sweep (10^4 joints)", ok)


def test_criterion_5_exact_tiny_bandit():
    env = BanditEnv(means=(0.9, 0.5))
    schedule = Schedule(K=2, delta_min=env.delta_min)
    ok = True
    for t in (1, 2, 3):
        report = exact_bandit_report(env, schedule, t, tolerance=TOL)
        if report.margin < 0.0:  # the one-step bound must hold exactly
            ok = False
        for item in report.walk():
            if item.rhs_terms and item.rhs_terms[0][0] == "identity_slack":
                if item.lhs > TOL:
                    ok = False
            elif item.own_verdict != "holds":
                ok = False
    _report(5, "exact tiny bandit (K=2, T<=3)", ok)


def test_criterion_6_monte_carlo_bandit():
    t0 = time.perf_counter()
    env = BanditEnv(means=(0.9, 0.5))
    default = Schedule(K=2, delta_min=env.delta_min)
    constant = Schedule(K=2, delta_min=env.delta_min, kind="constant")
    res = run_ensemble(env, default, horizon=10 ** 4, seeds=1000, seed=0)
    res_c = run_ensemble(env, constant, horizon=10 ** 4, seeds=1000, seed=0)
    report = one_step_report(res)
    bound_ok = all(c.own_verdict == "holds" for c in report.children)
    exp_d = regret_exponent(res)
    exp_c = regret_exponent(res_c)
    elapsed = time.perf_counter() - t0
    ok = bound_ok and 0.35 <= exp_d <= 0.65 and exp_c >= 0.85 \
        and elapsed <= 1800.0
    print(f"\n  exponent(default)={exp_d:.3f}, exponent(constant)={exp_c:.3f},"
          f" one-step bound {'holds' if bound_ok else 'violated'},"
          f" {elapsed:.1f}s")
    _report(6, "Monte Carlo bandit", ok)


def test_criterion_7_query_worlds():
    ok = True
    for name, world in acceptance_worlds().items():
        joint = enumerate_active(world, 2)
        identity = population_identity_report(joint, world)
        if identity.lhs > TOL:
            ok = False
        if active_slow_bound(joint, world).margin < -TOL:
            ok = False
        for child in query_information_report(joint, world).children:
            if child.margin < -TOL:
                ok = False
    _report(7, "query-world identities and gap bound", ok)


def test_criterion_8_littlestone():
    ok = (littlestone_dimension(singleton_class(range(4))) == 0
          and all(littlestone_dimension(full_class(range(m))) == m
                  for m in (1, 2, 3))
          and littlestone_dimension(threshold_class((1, 2, 3))) == 2)
    rng = random.Random(8)
    for _ in range(50):
        cls = random_class(rng)
        if littlestone_dimension(cls) < vc_dimension(cls):
            ok = False
    for cls, n in ((singleton_class(range(3)), 4), (full_class(range(2)), 3),
                   (full_class(range(3)), 3), (threshold_class(), 4)):
        report = pattern_budget_report(realizable_instance(cls, n, seed=0))
        if report.margin < -TOL:
            ok = False
    _report(8, "sequential dimension and pattern cap", ok)


def test_criterion_9_determinism(tmp_path):
    pairs = []
    for tag, args in (("sweep", ["sweep", "--worlds", "3", "--seed", "4"]),
                      ("bandit", ["bandit", "--horizon", "600",
                                  "--seeds", "60", "--seed", "4"])):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{tag}-{run}"
            code = main(args + ["--out", str(out)])
            assert code in (0, 3)
            outs.append(out)
        for csv_path in sorted(outs[0].glob("*.csv")):
            pairs.append((csv_path, outs[1] / csv_path.name))
    ok = bool(pairs) and all(a.read_bytes() == b.read_bytes()
                             for a, b in pairs)
    print(f"\n  compared {len(pairs)} CSV artifacts byte-for-byte")
    _report(9, "deterministic CSV artifacts", ok)
