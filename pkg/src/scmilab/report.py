"""Result collection: CSV artifacts, plain-text summaries, and figures.

All tabular output is CSV with repr-formatted floats, written by a single
collector in deterministic order so identical configs and seeds produce
byte-identical files.  Figures are rendered to files next to the CSVs.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bounds import BoundReport  # noqa: E402

__all__ = [
    "SuiteResult",
    "render",
    "write_rows",
    "write_reports_csv",
    "write_summary",
    "margin_histogram",
    "regret_figure",
    "exit_code",
]


def render(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


@dataclass
class SuiteResult:
    """A finished suite: flattened reports plus bookkeeping."""

    reports: list
    config_digest: str = ""
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def counts(self) -> dict:
        out = {"holds": 0, "violated": 0, "inconclusive": 0}
        for report in self._flat():
            out[report.own_verdict] += 1
        return out

    def _flat(self):
        for report in self.reports:
            yield from report.walk()

    @property
    def verdict(self) -> str:
        counts = self.counts
        if counts["violated"]:
            return "violated"
        if counts["inconclusive"]:
            return "inconclusive"
        return "holds"


def exit_code(result: SuiteResult) -> int:
    return {"holds": 0, "violated": 1, "inconclusive": 3}[result.verdict]


def write_rows(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([render(v) for v in row])


def write_reports_csv(path, result: SuiteResult) -> None:
    rows = []
    for report in result._flat():
        rows.append([report.name, report.lhs, report.rhs, report.margin,
                     report.stderr, report.mode, report.own_verdict,
                     report.inconclusive_reason or ""])
    write_rows(path, ["name", "lhs", "rhs", "margin", "stderr", "mode",
                      "verdict", "note"], rows)


def write_summary(path, result: SuiteResult, title: str,
                  lines: list | None = None) -> None:
    counts = result.counts
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"== {title} ==\n")
        fh.write(f"config digest: {result.config_digest}\n")
        fh.write(f"checks: {sum(counts.values())} "
                 f"(holds={counts['holds']}, violated={counts['violated']}, "
                 f"inconclusive={counts['inconclusive']})\n")
        fh.write(f"overall: {result.verdict.upper()}\n")
        fh.write(f"wall time: {result.wall_time:.2f}s\n")
        for line in lines or []:
            fh.write(line + "\n")
        fh.write("\n")
        for report in result.reports:
            for item in report.walk():
                fh.write(item.summary_line() + "\n")


def margin_histogram(path, result: SuiteResult, title: str) -> None:
    margins = [r.margin for r in result._flat()
               if r.inconclusive_reason is None]
    fig, ax = plt.subplots(figsize=(6, 4))
    if margins:
        ax.hist(margins, bins=40, color="steelblue", edgecolor="black")
    ax.axvline(0.0, color="crimson", linestyle="--", linewidth=1)
    ax.set_xlabel("bound margin (rhs - lhs)")
    ax.set_ylabel("checks")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def regret_figure(path, curves: dict, one_step: dict | None = None) -> None:
    """Log-log cumulative regret curves; optionally a second panel with the
    per-round expected regret of the deployed policy against its bound.

    ``curves`` maps label -> cumulative regret array; ``one_step`` maps
    label -> (times, means, stderrs, bounds).
    """
    panels = 2 if one_step else 1
    fig, axes = plt.subplots(1, panels, figsize=(6 * panels, 4))
    if panels == 1:
        axes = [axes]
    ax = axes[0]
    for label, curve in curves.items():
        ts = range(1, len(curve) + 1)
        ax.loglog(ts, curve, label=label)
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    ax.set_title("cumulative regret")
    if one_step:
        ax2 = axes[1]
        for label, (ts, means, errs, bounds) in one_step.items():
            ax2.errorbar(ts, means, yerr=[4 * e for e in errs],
                         fmt="o-", ms=3, label=f"{label}: estimate")
            ax2.loglog(ts, bounds, "--", label=f"{label}: bound")
        ax2.set_xscale("log")
        ax2.set_yscale("log")
        ax2.set_xlabel("round")
        ax2.set_ylabel("one-step expected regret")
        ax2.legend(fontsize=8)
        ax2.set_title("one-step bound")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


class Stopwatch:
    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._t0
        return False
