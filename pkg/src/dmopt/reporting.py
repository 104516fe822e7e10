"""Run persistence and report generation.

Each run is stored as one CSV (change_index, t, igd, hv, wall_ms) named
after its experiment cell, next to a JSON summary per `run` invocation.
`report` aggregates every run CSV found in a directory into a
comparison table, a long-format per-change curve CSV, and rendered
figures of the IGD evolution.

Floats are serialized with 17 significant digits and a fixed newline so
identically seeded runs produce byte-identical files.  The wall_ms
column is reserved (always 0) for the same reason; real timings live in
the JSON summaries.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ConfigurationError
from .harness import RunRecord, SummaryRow, summarize
from .metrics import MetricTrace

RUN_COLUMNS = ["change_index", "t", "igd", "hv", "wall_ms"]
_RUN_NAME = re.compile(
    r"^(?P<problem>[^_]+)_(?P<optimizer>[^_]+)_(?P<variant>[^_]+)"
    r"_nt(?P<nt>\d+)_tt(?P<tt>\d+)_run(?P<run>\d+)\.csv$"
)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def run_stem(record: RunRecord) -> str:
    return (f"{record.problem}_{record.optimizer}_{record.variant}"
            f"_nt{record.n_t}_tt{record.tau_t}_run{record.run_index:03d}")


def write_run_csv(record: RunRecord, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{run_stem(record)}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_COLUMNS)
        for i, (t, ig, h) in enumerate(zip(record.trace.times,
                                           record.trace.igd_values,
                                           record.trace.hv_values), start=1):
            writer.writerow([i, fmt(t), fmt(ig), fmt(h), fmt(0.0)])
    if record.generation_trace:
        gen_path = out_dir / f"{run_stem(record)}_gen.csv"
        with open(gen_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["tau", "t", "igd"])
            for tau, t, ig in record.generation_trace:
                writer.writerow([tau, fmt(t), fmt(ig)])
    return path


def load_run_csv(path: Path) -> RunRecord:
    m = _RUN_NAME.match(path.name)
    if not m:
        raise ConfigurationError(f"{path.name} does not look like a run CSV")
    times, igd_values, hv_values = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RUN_COLUMNS:
            raise ConfigurationError(f"{path.name}: unexpected columns {reader.fieldnames}")
        for row in reader:
            times.append(float(row["t"]))
            igd_values.append(float(row["igd"]))
            hv_values.append(float(row["hv"]))
    return RunRecord(
        config={},
        variant=m["variant"],
        problem=m["problem"],
        optimizer=m["optimizer"],
        n_t=int(m["nt"]),
        tau_t=int(m["tt"]),
        run_index=int(m["run"]),
        trace=MetricTrace(times=times, igd_values=igd_values, hv_values=hv_values),
    )


def load_all_runs(out_dir: Path) -> list[RunRecord]:
    records = []
    for path in sorted(Path(out_dir).glob("*.csv")):
        if _RUN_NAME.match(path.name):
            records.append(load_run_csv(path))
    return records


def write_summary_json(records: list[RunRecord], cfg_snapshot: dict, out_dir: Path,
                       reference_variant: str = "da") -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = summarize(records, reference_variant)
    payload = {
        "config": cfg_snapshot,
        "reference_variant": reference_variant,
        "cells": [
            {
                "problem": r.problem,
                "optimizer": r.optimizer,
                "n_t": r.n_t,
                "tau_t": r.tau_t,
                "variant": r.variant,
                "runs": r.runs,
                "migd_mean": r.migd_mean,
                "migd_std": r.migd_std,
                "mhv_mean": r.mhv_mean,
                "mhv_std": r.mhv_std,
                "migd_ranksum_p": r.migd_p,
                "mhv_ranksum_p": r.mhv_p,
                "migd_marker": r.migd_marker,
                "mhv_marker": r.mhv_marker,
            }
            for r in rows
        ],
        "wall_ms": {
            f"{r.variant}/run{r.run_index:03d}": r.wall_ms for r in records if r.wall_ms
        },
    }
    first = records[0]
    path = out_dir / (f"summary_{first.problem}_{first.optimizer}"
                      f"_nt{first.n_t}_tt{first.tau_t}.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_comparison_csv(rows: list[SummaryRow], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["problem", "optimizer", "n_t", "tau_t", "variant", "runs",
                         "migd_mean", "migd_std", "migd_marker", "migd_p",
                         "mhv_mean", "mhv_std", "mhv_marker", "mhv_p"])
        for r in rows:
            writer.writerow([
                r.problem, r.optimizer, r.n_t, r.tau_t, r.variant, r.runs,
                fmt(r.migd_mean), fmt(r.migd_std), r.migd_marker,
                fmt(r.migd_p) if r.migd_p is not None else "",
                fmt(r.mhv_mean), fmt(r.mhv_std), r.mhv_marker,
                fmt(r.mhv_p) if r.mhv_p is not None else "",
            ])
    return path


def per_change_means(records: list[RunRecord]) -> list[tuple[str, int, float]]:
    """(variant, change_index, mean igd) rows averaged over runs."""
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.variant, []).append(r)
    rows = []
    for variant in sorted(groups):
        traces = np.array([r.trace.igd_values for r in groups[variant]])
        means = traces.mean(axis=0)
        rows.extend((variant, i + 1, float(v)) for i, v in enumerate(means))
    return rows


def write_long_csv(records: list[RunRecord], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variant", "change_index", "mean_igd"])
        for variant, idx, value in per_change_means(records):
            writer.writerow([variant, idx, fmt(value)])
    return path


def render_igd_evolution(records: list[RunRecord], path: Path) -> Path:
    """Mean IGD versus change index, one line per variant."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = per_change_means(records)
    variants = sorted({v for v, _, _ in rows})
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for variant in variants:
        points = [(i, v) for name, i, v in rows if name == variant]
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker="o", markersize=3, linewidth=1.2, label=variant)
    ax.set_xlabel("environment change")
    ax.set_ylabel("mean IGD")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_summary_bars(rows: list[SummaryRow], path: Path) -> Path:
    """Mean MIGD with std error bars per variant (one panel per cell)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cells: dict[tuple, list[SummaryRow]] = {}
    for r in rows:
        cells.setdefault((r.problem, r.optimizer, r.n_t, r.tau_t), []).append(r)
    fig, axes = plt.subplots(1, len(cells), figsize=(4.5 * len(cells), 3.8), squeeze=False)
    for ax, (key, group) in zip(axes[0], sorted(cells.items())):
        names = [g.variant for g in group]
        means = [g.migd_mean for g in group]
        stds = [g.migd_std for g in group]
        ax.bar(range(len(group)), means, yerr=stds, capsize=3)
        ax.set_xticks(range(len(group)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_title(f"{key[0]}/{key[1]} nt={key[2]} taut={key[3]}", fontsize=9)
        ax.set_ylabel("MIGD")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


@dataclass
class ReportPaths:
    comparison: Path
    long_csv: Path
    figures: list[Path] = field(default_factory=list)


def generate_report(out_dir: Path, reference_variant: str = "da") -> ReportPaths:
    """Aggregate all run CSVs in ``out_dir`` into tables and figures."""
    out_dir = Path(out_dir)
    records = load_all_runs(out_dir)
    if not records:
        raise ConfigurationError(f"no run CSVs found in {out_dir}")
    rows = summarize(records, reference_variant)
    comparison = write_comparison_csv(rows, out_dir / "comparison.csv")
    long_csv = write_long_csv(records, out_dir / "igd_evolution.csv")
    figures = [
        render_igd_evolution(records, out_dir / "igd_evolution.png"),
        render_summary_bars(rows, out_dir / "migd_summary.png"),
    ]
    return ReportPaths(comparison=comparison, long_csv=long_csv, figures=figures)
