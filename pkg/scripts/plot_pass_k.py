#!/usr/bin/env python3
"""Plot pass^k curves and per-bin bars from a run's exported tables.csv.

Usage: python scripts/plot_pass_k.py --store out/pipeline/store --run-id oracle-default --out out/figures
"""

from __future__ import annotations

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load_rows(path: Path) -> list[dict]:
    with path.open() as f:
        return list(csv.DictReader(f))


def plot_curves(rows: list[dict], dimension: str, out: Path) -> None:
    series: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        if row["dimension"] != dimension:
            continue
        series[f"{row['mode']}:{row['group']}"].append((int(row["k"]), float(row["pass_hat_k"])))
    if not series:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, points in sorted(series.items()):
        points.sort()
        ax.plot([k for k, _ in points], [v for _, v in points], marker="o", label=label)
    ax.set_xlabel("k")
    ax.set_ylabel("pass^k")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"pass^k by {dimension}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / f"pass_k_{dimension}.png", dpi=150)
    plt.close(fig)


def plot_bin_bars(rows: list[dict], dimension: str, out: Path) -> None:
    groups, values, proportions = [], [], []
    for row in rows:
        if row["dimension"] == dimension and row["k"] == "1":
            groups.append(f"{row['mode']}:{row['group']}")
            values.append(float(row["pass_hat_k"]))
            proportions.append(float(row["task_proportion"]))
    if not groups:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(groups))
    ax.bar(xs, proportions, color="#cccccc", label="task proportion")
    ax.bar(xs, values, width=0.5, color="#3366aa", label="pass^1")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(groups, rotation=45, ha="right", fontsize=7)
    ax.set_title(f"pass^1 by {dimension}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / f"pass_1_{dimension}.png", dpi=150)
    plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--store", required=True)
    parser.add_argument("--run-id", required=True)
    parser.add_argument("--out", default="out/figures")
    args = parser.parse_args()

    tables = Path(args.store) / args.run_id / "tables.csv"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = load_rows(tables)
    for dimension in ("overall", "intent", "persona"):
        plot_curves(rows, dimension, out)
    for dimension in ("action_bin", "subtask_count"):
        plot_bin_bars(rows, dimension, out)
    print(f"figures written to {out}")


if __name__ == "__main__":
    main()
