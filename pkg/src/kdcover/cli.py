"""Command line interface: gen, solve, bench, check, render.

Result files are self-contained JSON: the full timeline (assignments,
supports, objective coefficients), the certified bounds, and run stats, so
`check` is an independent verifier rather than a re-run.  Objective
coefficients are stored divided by pi (sums of squared radii); reported
upper/lower values include the pi factor.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .envelope import TimelineSegment
from .geometry import MovingInstance, QuadraticPoly, squared_distance_poly
from .instances import (
    FormatError,
    GenParams,
    generate,
    read_instance,
    write_instance,
)
from .kinetic import ImprovementFlags, check_feasible
from .minmax import KineticResult, SolverConfig, fixed_nn_baseline, solve_minmax

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TIMEOUT = 3
EXIT_CHECK = 4
EXIT_IO = 5

RESULT_FORMAT = "kdc-result"
RESULT_VERSION = 1

CSV_FIELDS = [
    "instance_id",
    "n",
    "m",
    "seed",
    "class",
    "algorithm",
    "flags",
    "upper",
    "lower",
    "gap",
    "iterations",
    "static_solves",
    "time_static_s",
    "time_extend_merge_s",
    "time_total_s",
    "timed_out",
]

# Desk-scale default: the full-size benchmark schedules times this factor.
DEFAULT_SCALE = 0.2


@dataclass(frozen=True)
class BenchRecord:
    instance_id: str
    n: int
    m: int
    seed: int
    instance_class: str
    algorithm: str
    flags: str
    upper: float
    lower: float
    gap: float
    iterations: int
    static_solves: int
    time_static_s: float
    time_extend_merge_s: float
    time_total_s: float
    timed_out: bool

    def row(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "class": self.instance_class,
            "algorithm": self.algorithm,
            "flags": self.flags,
            "upper": repr(self.upper),
            "lower": repr(self.lower),
            "gap": "inf" if math.isinf(self.gap) else repr(self.gap),
            "iterations": self.iterations,
            "static_solves": self.static_solves,
            "time_static_s": f"{self.time_static_s:.6f}",
            "time_extend_merge_s": f"{self.time_extend_merge_s:.6f}",
            "time_total_s": f"{self.time_total_s:.6f}",
            "timed_out": str(self.timed_out).lower(),
        }


def flags_label(flags: ImprovementFlags) -> str:
    parts = []
    if flags.no_dup:
        parts.append("nodup")
    if flags.imp_ext:
        parts.append("impext")
    if flags.part_ext:
        parts.append("partext")
    return "+".join(parts) if parts else "none"


def parse_flags(text: str) -> ImprovementFlags:
    if not text or text == "none":
        return ImprovementFlags()
    known = {"nodup": "no_dup", "impext": "imp_ext", "partext": "part_ext"}
    values = {}
    for token in text.replace("+", ",").split(","):
        token = token.strip().lower()
        if token not in known:
            raise argparse.ArgumentTypeError(f"unknown flag {token!r}")
        values[known[token]] = True
    return ImprovementFlags(**values)


def result_to_json(instance_id: str, algorithm: str, flags: ImprovementFlags,
                   config: dict, result: KineticResult) -> str:
    tl = result.timeline
    doc = {
        "format": RESULT_FORMAT,
        "version": RESULT_VERSION,
        "instance_id": instance_id,
        "algorithm": algorithm,
        "flags": {"no_dup": flags.no_dup, "imp_ext": flags.imp_ext, "part_ext": flags.part_ext},
        "config": config,
        "upper": result.upper,
        "lower": result.lower,
        "gap": None if math.isinf(result.gap) else result.gap,
        "iterations": result.iterations,
        "timed_out": result.timed_out,
        "stats": {
            "time_static_s": result.stats.time_static,
            "time_extend_merge_s": result.stats.time_extend_merge,
            "time_total_s": result.stats.time_total,
            "static_solves": result.stats.static_solves,
            "events_processed": result.stats.events_processed,
            "stop_reason": result.stats.stop_reason,
        },
        "timeline": {
            "value": float(tl.value),
            "segments": [
                {
                    "t_start": float(seg.t_start),
                    "t_end": float(seg.t_end),
                    "assignment": list(seg.assignment),
                    "supports": [s for s in seg.supports],
                    "objective": [float(seg.poly.a), float(seg.poly.b), float(seg.poly.c)],
                }
                for seg in tl.segments
            ],
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def load_result(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != RESULT_FORMAT or doc.get("version") != RESULT_VERSION:
        raise FormatError(f"{path}: not a kdc-result v{RESULT_VERSION} file")
    return doc


def result_segments(doc) -> list[TimelineSegment]:
    segs = []
    for raw in doc["timeline"]["segments"]:
        segs.append(
            TimelineSegment(
                raw["t_start"],
                raw["t_end"],
                tuple(raw["assignment"]),
                tuple(raw["supports"]),
                QuadraticPoly(*raw["objective"]),
            )
        )
    return segs


# -- gen ---------------------------------------------------------------------


def _schedule(set_name: str, scale: float):
    """Benchmark set schedules, scaled.  Yields (n, m, count)."""
    def sc(v):
        return max(1, round(v * scale))

    if set_name == "fix":
        yield sc(500), sc(25), 25
    elif set_name == "fix_n":
        for m in range(5, 51, 5):
            yield sc(500), sc(m), 10
    elif set_name == "fix_m":
        for n in range(50, 501, 50):
            yield sc(n), sc(25), 10
    else:
        raise ValueError(f"unknown set {set_name!r}")


def cmd_gen(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    try:
        if args.set:
            scale = 1.0 if args.full else args.scale
            counter = 0
            for n, m, count in _schedule(args.set, scale):
                for rep in range(count):
                    seed = args.seed + counter
                    counter += 1
                    params = GenParams(
                        n=n, m=m, seed=seed,
                        len_min=args.len_min, len_max=args.len_max,
                        instance_class=args.instance_class,
                    )
                    inst = generate(params)
                    name = f"{args.set}_n{n}_m{m}_s{seed}.json"
                    inst.metadata["id"] = name[:-5]
                    write_instance(out / name, inst)
                    entries.append(
                        {"id": name[:-5], "path": name, "n": n, "m": m,
                         "seed": seed, "class": args.instance_class}
                    )
            manifest = {
                "format": "kdc-manifest",
                "version": 1,
                "set": args.set,
                "scale": scale,
                "instances": entries,
            }
        else:
            params = GenParams(
                n=args.n, m=args.m, seed=args.seed,
                len_min=args.len_min, len_max=args.len_max,
                instance_class=args.instance_class,
            )
            inst = generate(params)
            name = f"{args.instance_class}_n{args.n}_m{args.m}_s{args.seed}.json"
            inst.metadata["id"] = name[:-5]
            write_instance(out / name, inst)
            entries.append(
                {"id": name[:-5], "path": name, "n": args.n, "m": args.m,
                 "seed": args.seed, "class": args.instance_class}
            )
            manifest = {"format": "kdc-manifest", "version": 1, "instances": entries}
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(entries)} instance(s) + manifest.json to {out}")
    return EXIT_OK


# -- solve -------------------------------------------------------------------


def _instance_id(path, instance: MovingInstance) -> str:
    return str(instance.metadata.get("id", Path(path).stem))


def run_algorithm(instance: MovingInstance, algorithm: str, flags: ImprovementFlags,
                  args) -> KineticResult:
    if algorithm == "fixed_nn":
        return fixed_nn_baseline(instance, k=args.k, exact_arithmetic=args.exact_arith)
    config = SolverConfig(
        static_backend="nn" if algorithm == "nn" else "exact",
        flags=flags,
        target_gap=args.gap,
        coarse_gap=args.coarse_gap,
        tighten_threshold=args.tighten,
        time_limit=args.time_limit,
        exact_arithmetic=args.exact_arith,
        seed=args.seed,
    )
    return solve_minmax(instance, config)


def cmd_solve(args) -> int:
    try:
        instance = read_instance(args.instance)
    except (OSError, FormatError) as exc:
        print(f"cannot read instance: {exc}", file=sys.stderr)
        return EXIT_IO
    flags = args.flags
    result = run_algorithm(instance, args.algo, flags, args)
    instance_id = _instance_id(args.instance, instance)
    config = {
        "target_gap": args.gap,
        "coarse_gap": args.coarse_gap,
        "tighten_threshold": args.tighten,
        "time_limit": args.time_limit,
        "exact_arithmetic": args.exact_arith,
        "seed": args.seed,
        "k": args.k,
    }
    out = args.output or (Path(args.instance).with_suffix("").name + ".result.json")
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(result_to_json(instance_id, args.algo, flags, config, result))
    except OSError as exc:
        print(f"cannot write result: {exc}", file=sys.stderr)
        return EXIT_IO
    gap_text = "unavailable" if math.isinf(result.gap) else f"{result.gap:.3e}"
    print(
        f"{instance_id}: algo={args.algo} flags={flags_label(flags)} "
        f"upper={result.upper:.6f} lower={result.lower:.6f} gap={gap_text} "
        f"iters={result.iterations} segments={len(result.timeline.segments)} "
        f"time={result.stats.time_total:.2f}s -> {out}"
    )
    return EXIT_TIMEOUT if result.timed_out else EXIT_OK


# -- bench -------------------------------------------------------------------


def _bench_cell(task):
    manifest_dir, entry, algorithm, flag_text, args_dict = task
    ns = argparse.Namespace(**args_dict)
    instance = read_instance(Path(manifest_dir) / entry["path"])
    flags = parse_flags(flag_text)
    try:
        result = run_algorithm(instance, algorithm, flags, ns)
        return BenchRecord(
            instance_id=entry["id"],
            n=entry["n"],
            m=entry["m"],
            seed=entry["seed"],
            instance_class=entry["class"],
            algorithm=algorithm,
            flags=flag_text,
            upper=result.upper,
            lower=result.lower,
            gap=result.gap,
            iterations=result.iterations,
            static_solves=result.stats.static_solves,
            time_static_s=result.stats.time_static,
            time_extend_merge_s=result.stats.time_extend_merge,
            time_total_s=result.stats.time_total,
            timed_out=result.timed_out,
        )
    except Exception as exc:  # partial failures become rows, the run continues
        print(f"bench cell failed ({entry['id']}, {algorithm}, {flag_text}): {exc}",
              file=sys.stderr)
        return BenchRecord(
            instance_id=entry["id"], n=entry["n"], m=entry["m"], seed=entry["seed"],
            instance_class=entry["class"], algorithm=algorithm, flags=flag_text,
            upper=math.nan, lower=math.nan, gap=math.nan, iterations=0,
            static_solves=0, time_static_s=0.0, time_extend_merge_s=0.0,
            time_total_s=0.0, timed_out=True,
        )


def cmd_bench(args) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    manifest_dir = Path(args.manifest).parent
    algorithms = args.algos.split(",")
    if args.flag_combos == "all":
        combos = []
        for nd in (False, True):
            for ie in (False, True):
                for pe in (False, True):
                    combos.append(flags_label(ImprovementFlags(nd, ie, pe)))
    else:
        combos = args.flag_combos.split(";")
    args_dict = {
        "gap": args.gap, "coarse_gap": args.coarse_gap, "tighten": args.tighten,
        "time_limit": args.time_limit, "exact_arith": args.exact_arith,
        "seed": args.seed, "k": args.k,
    }
    tasks = []
    for entry in manifest.get("instances", []):
        for algorithm in algorithms:
            cells = combos if algorithm == "exact" else ["none"]
            for flag_text in cells:
                tasks.append((str(manifest_dir), entry, algorithm, flag_text, args_dict))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_bench_cell, tasks))
    else:
        records = [_bench_cell(t) for t in tasks]
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for record in records:
                writer.writerow(record.row())
    except OSError as exc:
        print(f"cannot write CSV: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(records)} bench rows to {args.output}")
    return EXIT_OK


# -- check -------------------------------------------------------------------


def verify_result(doc, instance: MovingInstance, samples: int) -> list[str]:
    """Independent verification of a result file against its instance.

    Re-derives each segment's objective from the stored assignment, checks
    envelope contiguity and the stored peak, and re-runs the feasibility
    sampler.  Returns a list of violation messages (empty = pass).
    """
    problems = []
    segs = result_segments(doc)
    if not segs:
        return ["empty timeline"]
    if abs(segs[0].t_start - 0.0) > 1e-9 or abs(segs[-1].t_end - 1.0) > 1e-9:
        problems.append("timeline does not span [0, 1]")
    for i in range(1, len(segs)):
        if abs(segs[i].t_start - segs[i - 1].t_end) > 1e-9:
            problems.append(f"segment {i}: gap/overlap at t={segs[i].t_start!r}")
    polys = [
        [squared_distance_poly(st, obj) for obj in instance.objects]
        for st in instance.stations
    ]
    for i, seg in enumerate(segs):
        tm = 0.5 * (seg.t_start + seg.t_end)
        derived = [0.0, 0.0, 0.0]
        for s in range(instance.m):
            assigned = [j for j, st in enumerate(seg.assignment) if st == s]
            if not assigned:
                continue
            sup = max(assigned, key=lambda j: (polys[s][j](tm), -j))
            p = polys[s][sup]
            derived[0] += p.a
            derived[1] += p.b
            derived[2] += p.c
        stored = [seg.poly.a, seg.poly.b, seg.poly.c]
        scale = max(1.0, *(abs(v) for v in stored), *(abs(v) for v in derived))
        if any(abs(a - b) > 1e-9 * scale for a, b in zip(derived, stored)):
            problems.append(
                f"segment {i}: stored objective {stored} != derived {derived}"
            )
    report = check_feasible(segs, instance, samples)
    if not report.ok:
        problems.append(
            f"infeasible: violation {report.worst_violation:.3e} at "
            f"t={report.worst_time} object {report.worst_object}"
        )
    timeline_value = max(
        max(seg.poly(seg.t_start), seg.poly(seg.t_end)) for seg in segs
    )
    upper = doc["upper"]
    if abs(math.pi * timeline_value - upper) > 1e-9 * max(1.0, upper):
        problems.append(
            f"stored upper {upper} != pi * timeline peak {math.pi * timeline_value}"
        )
    lower = doc["lower"]
    if lower > upper * (1 + 1e-12) + 1e-12:
        problems.append(f"lower {lower} exceeds upper {upper}")
    return problems


def cmd_check(args) -> int:
    try:
        doc = load_result(args.result)
        instance = read_instance(args.instance)
    except (OSError, FormatError, json.JSONDecodeError) as exc:
        print(f"cannot read inputs: {exc}", file=sys.stderr)
        return EXIT_IO
    instance_id = _instance_id(args.instance, instance)
    if doc["instance_id"] != instance_id:
        print(
            f"result is for {doc['instance_id']!r}, instance is {instance_id!r}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    problems = verify_result(doc, instance, args.samples)
    if problems:
        print(f"FAIL: {problems[0]}")
        for extra in problems[1:]:
            print(f"      {extra}")
        return EXIT_CHECK
    print(f"PASS: {instance_id} ({len(doc['timeline']['segments'])} segments, "
          f"{args.samples} samples)")
    return EXIT_OK


# -- render ------------------------------------------------------------------


def render_svg(instance: MovingInstance, segments, t: float, size: int = 640) -> str:
    """One SVG snapshot: trajectories dotted, objects as dots, stations as
    triangles (solid green when their radius is zero), active disks shaded."""
    canvas = instance.canvas or (100.0, 100.0)
    w, h = float(canvas[0]), float(canvas[1])
    margin = 0.05 * max(w, h, 1.0)
    scale = size / (max(w, h) + 2 * margin)

    def sx(x):
        return (float(x) + margin) * scale

    def sy(y):
        return (h + margin - float(y)) * scale  # flip so +y points up

    width = (w + 2 * margin) * scale
    height = (h + 2 * margin) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.2f} {height:.2f}">',
        f'<rect x="{sx(0):.2f}" y="{sy(h):.2f}" width="{w * scale:.2f}" '
        f'height="{h * scale:.2f}" fill="white" stroke="#999"/>',
    ]
    radius = [0.0] * instance.m
    if segments and instance.n:
        k = 0
        while k + 1 < len(segments) and float(segments[k].t_end) < t:
            k += 1
        seg = segments[k]
        for s, sup in enumerate(seg.supports):
            if sup is not None:
                p = squared_distance_poly(instance.stations[s], instance.objects[sup])
                radius[s] = math.sqrt(max(float(p(t)), 0.0))
    for s, st in enumerate(instance.stations):
        if radius[s] > 0:
            parts.append(
                f'<circle cx="{sx(st.x):.2f}" cy="{sy(st.y):.2f}" '
                f'r="{radius[s] * scale:.2f}" fill="steelblue" fill-opacity="0.15" '
                f'stroke="steelblue"/>'
            )
    for obj in instance.objects:
        parts.append(
            f'<line x1="{sx(obj.start.x):.2f}" y1="{sy(obj.start.y):.2f}" '
            f'x2="{sx(obj.end.x):.2f}" y2="{sy(obj.end.y):.2f}" '
            f'stroke="#bbb" stroke-dasharray="3,3"/>'
        )
    for obj in instance.objects:
        pos = obj.at(t)
        parts.append(
            f'<circle cx="{sx(pos.x):.2f}" cy="{sy(pos.y):.2f}" r="3" fill="black"/>'
        )
    tri = 6.0
    for s, st in enumerate(instance.stations):
        x, y = sx(st.x), sy(st.y)
        fill = "green" if radius[s] == 0.0 else "none"
        parts.append(
            f'<polygon points="{x:.2f},{y - tri:.2f} {x - tri:.2f},{y + tri:.2f} '
            f'{x + tri:.2f},{y + tri:.2f}" fill="{fill}" stroke="green" '
            f'stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_render(args) -> int:
    try:
        instance = read_instance(args.instance)
        segments = result_segments(load_result(args.result)) if args.result else []
    except (OSError, FormatError, json.JSONDecodeError) as exc:
        print(f"cannot read inputs: {exc}", file=sys.stderr)
        return EXIT_IO
    times = [float(tok) for tok in args.times.split(",")]
    for t in times:
        if not (0.0 <= t <= 1.0):
            print(f"time {t} outside [0, 1]", file=sys.stderr)
            return EXIT_USAGE
    stem = Path(args.instance).stem
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t in times:
        svg = render_svg(instance, segments, t)
        path = out_dir / f"{stem}_t{t:g}.svg"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
        print(f"wrote {path}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def _add_solver_options(p: argparse.ArgumentParser):
    p.add_argument("--algo", choices=["exact", "nn", "fixed_nn"], default="exact")
    p.add_argument("--gap", type=float, default=1e-4, help="target optimality gap")
    p.add_argument("--coarse-gap", dest="coarse_gap", type=float, default=1e-2)
    p.add_argument("--tighten", type=float, default=0.015,
                   help="tighten the stationary gap below this overall gap")
    p.add_argument("--time-limit", dest="time_limit", type=float, default=600.0)
    p.add_argument("--flags", type=parse_flags, default=ImprovementFlags(),
                   help="comma list of nodup,impext,partext")
    p.add_argument("--exact-arith", dest="exact_arith", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10, help="fixed_nn interval count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdcover",
        description="Kinetic disk covering: certified min-max radius schedules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate instances")
    g.add_argument("--set", choices=["fix", "fix_n", "fix_m"], default=None)
    g.add_argument("--scale", type=float, default=DEFAULT_SCALE,
                   help="scale factor for the benchmark schedules")
    g.add_argument("--full", action="store_true", help="full-size schedules")
    g.add_argument("--class", dest="instance_class", default="random",
                   choices=["random", "same_slope", "same_start", "same_end"])
    g.add_argument("-n", type=int, default=50)
    g.add_argument("-m", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--len-min", dest="len_min", type=float, default=25.0)
    g.add_argument("--len-max", dest="len_max", type=float, default=50.0)
    g.add_argument("-o", "--output", default="instances")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("instance")
    s.add_argument("-o", "--output", default=None)
    _add_solver_options(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark matrix over a manifest")
    b.add_argument("manifest")
    b.add_argument("-o", "--output", default="bench.csv")
    b.add_argument("--algos", default="exact", help="comma list of exact,nn,fixed_nn")
    b.add_argument("--flag-combos", dest="flag_combos", default="none",
                   help="'all' for the 8 improvement combinations, or ';'-separated labels")
    b.add_argument("--jobs", type=int, default=1)
    _add_solver_options(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check", help="verify a result file against its instance")
    c.add_argument("result")
    c.add_argument("instance")
    c.add_argument("--samples", type=int, default=1000)
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("render", help="render SVG snapshots")
    r.add_argument("instance")
    r.add_argument("--result", default=None)
    r.add_argument("--times", default="0.25,0.5,0.75")
    r.add_argument("-o", "--output", default="renders")
    r.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
