"""Command-line front end.

Verbs: ``verify-identities`` (exact identity checks on the bundled worlds,
with an optional biased-selector negative control), ``sweep`` (seeded
random-world bound sweep, worlds persisted for replay), ``online``,
``active``, and ``bandit``.  Every verb writes CSV tables, a plain-text
summary, and a figure into the output directory; the exit status is
0 = all holds, 1 = violation, 2 = usage/config error, 3 = inconclusive only.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import active as active_mod
from . import bandit as bandit_mod
from .bandit_exact import exact_bandit_report
from .batch import BatchWorld, batch_info_bound, enumerate_batch, erm_algorithm
from .bounds import (BernsteinParams, BoundReport, bernstein_bound,
                     shifted_comparison_bound, slow_rate_bound,
                     stopping_bound, two_coordinate_bound)
from .config import (ConfigError, ExperimentConfig, bundled_world_paths,
                     config_digest, load_world_file)
from .enumeration import (conditional_population_risk, enumerate_joint,
                          row_swap_correlation, sequential_risks,
                          two_coordinate_correlation)
from .errors import ScmilabError
from .online import (full_class, gibbs_learner, littlestone_dimension,
                     online_reports, pattern_budget_report,
                     realizable_instance, singleton_class, threshold_class)
from .report import (Stopwatch, SuiteResult, exit_code, margin_histogram,
                     regret_figure, write_reports_csv, write_rows,
                     write_summary)
from .worlds import OutcomeSpace, RowKernel, WorldSpec, random_world

__all__ = ["main"]


def _identity_report(name, lhs_value, rhs_value, tolerance) -> BoundReport:
    return BoundReport(
        name=name, lhs=abs(float(lhs_value) - float(rhs_value)),
        rhs_terms=[("identity_slack", 0.0)], tolerance=tolerance,
        extras={"lhs_value": float(lhs_value), "rhs_value": float(rhs_value)})


def world_identity_reports(loaded, tolerance, selector_bias=None) -> list:
    joint = enumerate_joint(loaded.world, loaded.learner, loaded.n,
                            exact=loaded.exact_ok and selector_bias is None,
                            selector_bias=selector_bias)
    _, holdout, gap = sequential_risks(joint)
    reports = [_identity_report(
        f"{loaded.name}/gap-two-coordinate", gap,
        two_coordinate_correlation(joint), tolerance)]
    if loaded.world.row_kernel.exchangeable:
        reports.append(_identity_report(
            f"{loaded.name}/gap-row-swap", gap,
            row_swap_correlation(joint), tolerance))
    if loaded.world.row_kernel.conditional_product:
        reports.append(_identity_report(
            f"{loaded.name}/holdout-population", holdout,
            conditional_population_risk(joint, loaded.world, loaded.learner),
            tolerance))
    return reports


def cmd_verify_identities(config: ExperimentConfig) -> SuiteResult:
    paths = [Path(p) for p in config.world_files] or bundled_world_paths()
    loaded = [load_world_file(p) for p in paths]
    reports = []

    def run(world):
        return world_identity_reports(world, config.tolerance,
                                      selector_bias=config.selector_bias)

    if config.parallel > 1:
        with ThreadPoolExecutor(max_workers=config.parallel) as pool:
            for out in pool.map(run, loaded):
                reports.extend(out)
    else:
        for world in loaded:
            reports.extend(run(world))

    # importance-weighted holdout vs population identity on the query worlds
    for name, world in active_mod.acceptance_worlds().items():
        joint = active_mod.enumerate_active(world, 2)
        reports.append(active_mod.population_identity_report(
            joint, world, tolerance=config.tolerance))
        reports[-1].name = f"{name}/{reports[-1].name}"
    return SuiteResult(reports=reports, config_digest=config_digest(config))


def _random_batch_world(seed: int):
    import random as _random
    from fractions import Fraction

    rng = _random.Random(seed)
    while True:
        weights = [rng.randint(0, 8) for _ in range(2)]
        if sum(weights) > 0:
            break
    total = sum(weights)
    atom_dist = {f"z{i}": Fraction(w, total)
                 for i, w in enumerate(weights) if w > 0}
    atoms = sorted(atom_dist)
    k = rng.randint(1, 4)
    tables = []
    seen = set()
    for _ in range(k):
        tab = tuple(rng.randint(0, 1) for _ in atoms)
        if tab not in seen:
            seen.add(tab)
            tables.append(tab)
    hypotheses = tuple(tables)

    def loss(w, z):
        return w[atoms.index(z)]

    return BatchWorld(atom_dist=atom_dist, hypotheses=hypotheses, loss=loss,
                      algorithm=erm_algorithm(hypotheses, loss))


def _stop_rule(atom):
    def rule(t, hist):
        if t == 1 or not hist:
            return True
        return hist[-1][0] == atom  # continue while the last selected z matches

    return rule


def sweep_world_reports(seed: int, tolerance: float) -> list:
    rw = random_world(seed)
    joint = enumerate_joint(rw.world, rw.learner, rw.n, exact=True)
    reports = [slow_rate_bound(joint, tolerance=tolerance),
               two_coordinate_bound(joint, tolerance=tolerance),
               shifted_comparison_bound(joint, tolerance=tolerance)]

    # comparator: the fixed state with the smallest ghost-path weighted loss,
    # so the learner's holdout excess risk stays nonnegative
    def ghost_risk(w):
        total = 0
        for t in range(1, rw.n + 1):
            iu = joint.index(f"u{t}")
            iq = joint.index(f"q{t}")
            ia, ib = joint.index(f"za{t}"), joint.index(f"zb{t}")
            total += joint.expectation(
                lambda v: v[iq] * rw.learner.loss(
                    w, v[ib] if v[iu] == 0 else v[ia]))
        return float(total) / rw.n

    best = min(rw.learner.states,
               key=lambda w: (ghost_risk(w), rw.learner.states.index(w)))
    reports.append(bernstein_bound(
        joint, lambda z: rw.learner.loss(best, z),
        BernsteinParams(), tolerance=tolerance))

    reports.append(stopping_bound(
        rw.world, rw.learner, _stop_rule(rw.world.space.atoms[0]), rw.n,
        exact=True, tolerance=tolerance))
    for report in reports:
        report.name = f"world{seed}/{report.name}"
    return reports


def cmd_sweep(config: ExperimentConfig) -> SuiteResult:
    if config.replay is not None:
        seeds = [config.replay]
    else:
        seeds = [config.seed * 1_000_000 + i for i in range(config.worlds)]

    reports = []
    world_rows = []
    for s in seeds:
        world_rows.append(random_world(s).descriptor)

    def run(s):
        return sweep_world_reports(s, config.tolerance)

    if config.parallel > 1:
        with ThreadPoolExecutor(max_workers=config.parallel) as pool:
            for out in pool.map(run, seeds):
                reports.extend(out)
    else:
        for s in seeds:
            reports.extend(run(s))

    # batch-setting sweep on a handful of tiny i.i.d. worlds
    for i in range(5):
        bw = _random_batch_world(config.seed * 77 + i)
        joint = enumerate_batch(bw, 3, exact=True)
        report = batch_info_bound(joint, bw, tolerance=config.tolerance)
        report.name = f"batch{i}/{report.name}"
        reports.append(report)

    # query worlds: gap and fast-rate bounds plus the per-round identity
    for name, world in active_mod.acceptance_worlds().items():
        joint = active_mod.enumerate_active(world, 2)
        for report in (
                active_mod.active_slow_bound(joint, world,
                                             tolerance=config.tolerance),
                active_mod.active_fast_bound(joint, world,
                                             tolerance=config.tolerance),
                active_mod.query_information_report(
                    joint, world, tolerance=config.tolerance)):
            report.name = f"{name}/{report.name}"
            reports.append(report)

    reports.append(bandit_mod.square_transfer_sweep(
        num=10 ** 4, seed=config.seed))

    result = SuiteResult(reports=reports, config_digest=config_digest(config))
    out = Path(config.out)
    header = ["seed", "n", "atoms", "states", "exchangeable",
              "conditional_product", "history_dependent", "stochastic_update",
              "weight_kind"]
    write_rows(out / "worlds.csv", header,
               [[d[h] if h not in ("atoms", "states") else " ".join(d[h])
                 for h in header] for d in world_rows])
    return result


def cmd_online(config: ExperimentConfig) -> SuiteResult:
    n = min(config.horizon, 4)
    atoms = ("z0", "z1")
    table = {("z0", "z0"): 0.3 * 0.3, ("z0", "z1"): 0.3 * 0.7,
             ("z1", "z0"): 0.7 * 0.3, ("z1", "z1"): 0.7 * 0.7}
    kernel = RowKernel(table, exchangeable=True, conditional_product=True)
    world = WorldSpec(OutcomeSpace(atoms), kernel)
    loss = {("w0", "z0"): 0.0, ("w0", "z1"): 1.0,
            ("w1", "z0"): 1.0, ("w1", "z1"): 0.0}
    learner = gibbs_learner(("w0", "w1"), lambda w, z: loss[(w, z)], rate=1.0)
    reports = [online_reports(world, learner, n, tolerance=config.tolerance)]

    for label, cls in (("singleton", singleton_class(range(3))),
                       ("full3", full_class(range(3))),
                       ("thresholds", threshold_class())):
        inst = realizable_instance(cls, n=min(n, 4), seed=config.seed)
        report = pattern_budget_report(inst, tolerance=config.tolerance)
        report.name = f"{label}/{report.name}"
        report.extras["littlestone"] = littlestone_dimension(cls)
        reports.append(report)
    return SuiteResult(reports=reports, config_digest=config_digest(config))


def cmd_active(config: ExperimentConfig) -> SuiteResult:
    reports = []
    for name, world in active_mod.acceptance_worlds().items():
        joint = active_mod.enumerate_active(world, 2)
        for report in (
                active_mod.population_identity_report(
                    joint, world, tolerance=config.tolerance),
                active_mod.active_slow_bound(joint, world,
                                             tolerance=config.tolerance),
                active_mod.active_fast_bound(joint, world,
                                             tolerance=config.tolerance),
                active_mod.query_information_report(
                    joint, world, tolerance=config.tolerance)):
            report.name = f"{name}/{report.name}"
            reports.append(report)
    return SuiteResult(reports=reports, config_digest=config_digest(config))


def cmd_bandit(config: ExperimentConfig) -> SuiteResult:
    env = bandit_mod.BanditEnv(means=tuple(config.bandit_means))
    out = Path(config.out)
    if config.horizon <= 3:
        schedule = bandit_mod.Schedule(K=env.K, delta_min=env.delta_min,
                                       kind=config.schedule)
        report = exact_bandit_report(env, schedule, config.horizon,
                                     tolerance=config.tolerance)
        return SuiteResult(reports=[report],
                           config_digest=config_digest(config))

    default = bandit_mod.Schedule(K=env.K, delta_min=env.delta_min)
    constant = bandit_mod.Schedule(K=env.K, delta_min=env.delta_min,
                                   kind="constant")
    res_default = bandit_mod.run_ensemble(env, default, config.horizon,
                                          config.seeds, seed=config.seed)
    res_constant = bandit_mod.run_ensemble(env, constant, config.horizon,
                                           config.seeds, seed=config.seed)
    report = bandit_mod.one_step_report(res_default)
    exp_default = bandit_mod.regret_exponent(res_default)
    exp_constant = bandit_mod.regret_exponent(res_constant)
    report.extras.update({"exponent_default": exp_default,
                          "exponent_constant": exp_constant})

    bounds = [bandit_mod.one_step_bound_value(env, default, t)
              for t in res_default.log_times]
    write_rows(out / "regret.csv",
               ["t", "mean_regret", "stderr", "bound"],
               [[t, float(m), float(s), b]
                for t, m, s, b in zip(res_default.log_times,
                                      res_default.mean_inst_regret,
                                      res_default.stderr_inst_regret, bounds)])
    write_rows(out / "cumulative.csv",
               ["t", "cumulative_default", "cumulative_constant"],
               [[t + 1, float(a), float(b)]
                for t, (a, b) in enumerate(zip(res_default.cumulative_regret,
                                               res_constant.cumulative_regret))])
    regret_figure(
        out / "regret.png",
        {"decaying floor": res_default.cumulative_regret,
         "constant floor": res_constant.cumulative_regret},
        {"decaying floor": (list(res_default.log_times),
                            list(map(float, res_default.mean_inst_regret)),
                            list(map(float, res_default.stderr_inst_regret)),
                            bounds)})
    return SuiteResult(
        reports=[report], config_digest=config_digest(config),
        extras={"exponent_default": exp_default,
                "exponent_constant": exp_constant})


COMMANDS = {
    "verify-identities": cmd_verify_identities,
    "sweep": cmd_sweep,
    "online": cmd_online,
    "active": cmd_active,
    "bandit": cmd_bandit,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scmilab",
        description="Verification suites for paired-sample sequential runs")
    sub = parser.add_subparsers(dest="command", required=True)
    for verb in COMMANDS:
        p = sub.add_parser(verb)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--seeds", type=int, default=None)
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--worlds", type=int, default=None)
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--parallel", type=int, default=None)
        if verb == "verify-identities":
            p.add_argument("--world-file", action="append", default=None,
                           dest="world_files")
            p.add_argument("--selector-bias", type=float, default=None,
                           help="debug hook: unfair selector negative control")
        if verb == "sweep":
            p.add_argument("--replay", type=int, default=None,
                           help="re-run a single persisted world seed")
        if verb == "bandit":
            p.add_argument("--schedule", default=None,
                           choices=["default", "constant"])
            p.add_argument("--means", type=float, nargs="+", default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config") and v is not None}
    if "means" in overrides:
        overrides["bandit_means"] = tuple(overrides.pop("means"))
    try:
        config = ExperimentConfig.from_file(args.command, args.config,
                                            **overrides)
        if config.out == "out" and "out" not in overrides:
            config.out = f"out-{args.command}"
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        with Stopwatch() as watch:
            result = COMMANDS[args.command](config)
        result.wall_time = watch.elapsed
        write_reports_csv(out / "reports.csv", result)
        extra_lines = [f"{k}: {v}" for k, v in result.extras.items()]
        write_summary(out / "summary.txt", result, args.command, extra_lines)
        margin_histogram(out / "margins.png", result, args.command)
        return exit_code(result)
    except ScmilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
