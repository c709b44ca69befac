#!/usr/bin/env python3
"""End-to-end experiment: compose, verify, sample, run scripted baselines in
every mode, and export pass^k tables.

Usage: python scripts/run_pipeline.py --out out/pipeline [--trials 4 --seed 0]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from duet.cli import main as duet


def run(argv: list[str]) -> None:
    code = duet(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/pipeline")
    parser.add_argument("--trials", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    universe = out / "universe.json"
    sampled = out / "sampled.json"
    store = out / "store"

    run(["generate", "--out", str(universe)])
    run(["verify", "--tasks", str(universe)])
    run(["sample", "--tasks", str(universe), "--out", str(sampled), "--seed", str(args.seed)])

    baselines = [
        ("oracle-default", "default", "oracle"),
        ("oracle-no-user", "no_user", "oracle"),
        ("null-default", "default", "null"),
    ]
    for run_id, mode, agent in baselines:
        run(
            [
                "run", "--tasks", str(sampled), "--out", str(store),
                "--run-id", run_id, "--mode", mode, "--agent-policy", agent,
                "--trials", str(args.trials), "--seed", str(args.seed),
                "--max-steps", "60",
            ]
        )
        run(["evaluate", "--store", str(store), "--run-id", run_id, "--tasks", str(sampled)])
        run(["replay", "--store", str(store), "--run-id", run_id, "--tasks", str(sampled)])

    print(f"\npipeline complete; artifacts in {out}")
    print(f"browse them with: duet serve --store {store} --tasks {sampled}")


if __name__ == "__main__":
    main()
