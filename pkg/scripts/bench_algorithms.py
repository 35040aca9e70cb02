"""Algorithm comparison at desk scale: exact vs NN vs FixedNN across sizes.

Generates the scaled `fix_m` and `fix_n` sets, benches the three
algorithms, and prints quality/runtime summaries grouped by n or m.

Usage: python scripts/bench_algorithms.py [workdir] [--scale 0.2]
"""

import argparse
import csv
import statistics
import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kdcover.cli import main as kdcover


def summarize(out_csv: Path, group_key: str) -> None:
    rows = list(csv.DictReader(out_csv.open()))
    exact_upper = {}
    for row in rows:
        if row["algorithm"] == "exact":
            exact_upper[row["instance_id"]] = float(row["upper"])
    table = defaultdict(lambda: defaultdict(list))
    for row in rows:
        key = int(row[group_key])
        algo = row["algorithm"]
        table[key][f"{algo}_time"].append(float(row["time_total_s"]))
        ref = exact_upper.get(row["instance_id"])
        if ref and ref > 0:
            table[key][f"{algo}_ratio"].append(float(row["upper"]) / ref)
    print(f"\n{out_csv} grouped by {group_key}:")
    print(f"{group_key:>5} | median time (s) exact / nn / fixed_nn | median upper ratio nn / fixed_nn")
    for key in sorted(table):
        cols = table[key]
        times = " / ".join(
            f"{statistics.median(cols[f'{a}_time']):.3f}" for a in ("exact", "nn", "fixed_nn")
        )
        ratios = " / ".join(
            f"{statistics.median(cols[f'{a}_ratio']):.3f}" for a in ("nn", "fixed_nn")
        )
        print(f"{key:>5} | {times:<36} | {ratios}")


def run(workdir: Path, scale: float) -> None:
    for set_name, group_key in (("fix_m", "n"), ("fix_n", "m")):
        inst_dir = workdir / f"instances_{set_name}"
        out_csv = workdir / f"algos_{set_name}.csv"
        if not (inst_dir / "manifest.json").exists():
            assert kdcover(["gen", "--set", set_name, "--scale", str(scale),
                            "-o", str(inst_dir)]) == 0
        assert kdcover(["bench", str(inst_dir / "manifest.json"),
                        "--algos", "exact,nn,fixed_nn",
                        "--flag-combos", "nodup+impext+partext",
                        "-o", str(out_csv)]) == 0
        summarize(out_csv, group_key)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("workdir", nargs="?", default="experiments/algos")
    parser.add_argument("--scale", type=float, default=0.2)
    args = parser.parse_args()
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    run(workdir, args.scale)
