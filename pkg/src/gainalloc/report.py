"""Render sweep result tables into figures next to the CSV."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataError

_REQUIRED = {"policy", "duration", "resource_fraction", "total_gain", "treated_fraction"}


def _read_rows(sweep_csv: Path) -> list[dict[str, str]]:
    with sweep_csv.open("r", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = _REQUIRED - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"sweep CSV lacks columns: {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise DataError("sweep CSV contains no rows")
    return rows


def _series(rows: list[dict[str, str]], metric: str):
    """Mean metric per (policy, duration) over resource fractions."""
    grouped: dict[tuple[str, str], dict[float, list[float]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for row in rows:
        key = (row["policy"], row["duration"])
        grouped[key][float(row["resource_fraction"])].append(float(row[metric]))
    series = {}
    for key, per_fraction in sorted(grouped.items()):
        xs = sorted(per_fraction)
        ys = [sum(per_fraction[x]) / len(per_fraction[x]) for x in xs]
        series[key] = (xs, ys)
    return series


def _plot(series, ylabel: str, title: str, out_path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    linestyles = {"gain": "-", "probability": "--"}
    for (policy, duration), (xs, ys) in series.items():
        ax.plot(
            xs,
            ys,
            marker="o",
            linestyle=linestyles.get(policy, "-"),
            label=f"{policy} / {duration}",
        )
    ax.set_xlabel("share of available resources")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_sweep_figures(sweep_csv: Path, out_dir: Path | None = None) -> list[Path]:
    """Write total-gain and treated-share figures; returns the file paths."""
    rows = _read_rows(sweep_csv)
    target = out_dir if out_dir is not None else sweep_csv.parent
    target.mkdir(parents=True, exist_ok=True)
    stem = sweep_csv.stem

    gain_path = target / f"{stem}_total_gain.png"
    _plot(
        _series(rows, "total_gain"),
        "total gain",
        "Total gain vs. share of available resources",
        gain_path,
    )
    treated_path = target / f"{stem}_treated_fraction.png"
    _plot(
        _series(rows, "treated_fraction"),
        "share of treated cases",
        "Treated cases vs. share of available resources",
        treated_path,
    )
    return [gain_path, treated_path]
