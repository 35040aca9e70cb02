"""Improvement-strategy study at desk scale: which flags pay off?

Generates the scaled `fix` set, runs the exact solver under all 8
combinations of the improvement flags, and summarizes the timing
breakdown per combination from the bench CSV.

Usage: python scripts/bench_improvements.py [workdir] [--scale 0.2]
"""

import argparse
import csv
import statistics
import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kdcover.cli import main as kdcover


def run(workdir: Path, scale: float) -> None:
    inst_dir = workdir / "instances_fix"
    out_csv = workdir / "improvements.csv"
    if not (inst_dir / "manifest.json").exists():
        assert kdcover(["gen", "--set", "fix", "--scale", str(scale),
                        "-o", str(inst_dir)]) == 0
    assert kdcover(["bench", str(inst_dir / "manifest.json"),
                    "--algos", "exact", "--flag-combos", "all",
                    "-o", str(out_csv)]) == 0

    per_combo = defaultdict(lambda: defaultdict(list))
    for row in csv.DictReader(out_csv.open()):
        per_combo[row["flags"]]["static"].append(float(row["time_static_s"]))
        per_combo[row["flags"]]["extend"].append(float(row["time_extend_merge_s"]))
        per_combo[row["flags"]]["total"].append(float(row["time_total_s"]))

    print(f"\nImprovement-strategy summary ({out_csv}):")
    print(f"{'flags':<24}{'median static':>14}{'median extend':>15}{'median total':>14}")
    for flags, cols in sorted(per_combo.items(), key=lambda kv: sum(kv[1]['total'])):
        print(f"{flags:<24}"
              f"{statistics.median(cols['static']):>13.4f}s"
              f"{statistics.median(cols['extend']):>14.4f}s"
              f"{statistics.median(cols['total']):>13.4f}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("workdir", nargs="?", default="experiments/improvements")
    parser.add_argument("--scale", type=float, default=0.2)
    args = parser.parse_args()
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    run(workdir, args.scale)
