#!/usr/bin/env python3
"""Run the bundled experiment configs and drop CSV/JSON results under results/.

Usage:
    python scripts/run_experiments.py [--fast] [--out results] [--threads N]

--fast skips the slow paper-scale sweep (grid 4096) and the T=1000 soliton
run; the remaining suites take a few minutes altogether. Figures can then
be rendered from the CSVs with the symkg-plot tool (see plots/).
"""

import argparse
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
SLOW = {"convergence_paper_scale_theta10.json", "drift_soliton.json"}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--fast", action="store_true", help="skip the slow suites")
    parser.add_argument("--out", default="results")
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()

    failures = []
    for config in sorted((HERE / "configs").glob("*.json")):
        if args.fast and config.name in SLOW:
            print(f"-- skipping {config.name} (--fast)")
            continue
        kind = config.name.split("_")[0]
        subcommand = {
            "convergence": "convergence",
            "efficiency": "efficiency",
            "drift": "energy-drift",
            "simulate": "simulate",
        }[kind]
        cmd = [
            sys.executable, "-m", "symkg", subcommand,
            "--config", str(config),
            "--out", str(Path(args.out) / config.stem),
            "--threads", str(args.threads),
        ]
        print("->", " ".join(cmd))
        result = subprocess.run(cmd)
        if result.returncode != 0:
            print(f"   exited with {result.returncode}")
            failures.append((config.name, result.returncode))
    if failures:
        print("suites with nonzero exit:", failures)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
