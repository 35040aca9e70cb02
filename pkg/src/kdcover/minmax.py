"""Iterative min-max solver for the kinetic disk covering problem.

Seed with a stationary solution at t=0, extend it over the horizon, then
repeat: locate the peak of the incumbent timeline, re-solve the stationary
problem there, extend the improvement in both directions and fold it in
via the lower envelope.  The stationary solver's certified bounds at every
solved time are themselves lower bounds on the min-max optimum, so the
loop carries a certificate: it stops when the relative gap reaches the
target, when the peak provably cannot improve, or at the time limit.

Timeline polynomials store area / pi (sums of squared support radii);
`KineticResult.upper` and `.lower` carry the pi factor.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from fractions import Fraction

from .envelope import (
    SolutionTimeline,
    TimelineSegment,
    merge_lower_envelope,
    merge_partial,
)
from .geometry import EPS, MovingInstance, compare_event_times, quadratic_roots
from .kinetic import ImprovementFlags, extend, iter_extend
from .static_cover import (
    SolverBackend,
    enumerate_candidates,
    nn_heuristic,
    solve_exact,
)

__all__ = [
    "SolverConfig",
    "SolveStats",
    "KineticResult",
    "scheduled_gap",
    "solve_minmax",
    "fixed_nn_baseline",
]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one min-max solve.

    static_backend selects the stationary solver ("exact" or "nn"); the
    gap schedule starts every stationary solve at coarse_gap and tightens
    to target_gap once the overall gap falls below tighten_threshold.
    """

    static_backend: str = "exact"
    flags: ImprovementFlags = ImprovementFlags()
    target_gap: float = 1e-4
    coarse_gap: float = 1e-2
    tighten_threshold: float = 0.015
    time_limit: float = 600.0
    exact_arithmetic: bool = False
    seed: int = 0
    backend: SolverBackend | None = None
    max_iterations: int = 100_000

    def __post_init__(self):
        if not (0 <= self.target_gap <= self.coarse_gap):
            raise ValueError("need 0 <= target_gap <= coarse_gap")
        if not self.tighten_threshold > self.target_gap:
            raise ValueError("need tighten_threshold > target_gap")
        if self.static_backend not in ("exact", "nn"):
            raise ValueError(f"unknown static backend {self.static_backend!r}")


@dataclass
class SolveStats:
    time_static: float = 0.0
    time_extend_merge: float = 0.0
    time_total: float = 0.0
    static_solves: int = 0
    events_processed: int = 0
    stop_reason: str = ""


@dataclass(frozen=True)
class KineticResult:
    """Solution timeline with certified bounds.

    upper = pi * peak of the timeline objective; lower = pi * best
    stationary lower bound seen; gap = (upper - lower) / lower.  history
    records (upper, lower) once per iteration.
    """

    timeline: SolutionTimeline
    upper: float
    lower: float
    gap: float
    iterations: int
    stats: SolveStats
    timed_out: bool = False
    history: tuple[tuple[float, float], ...] = ()


def scheduled_gap(current_gap: float, config: SolverConfig) -> float:
    """Coarse stationary gap until the overall gap crosses the tighten
    threshold, then the target gap.  current_gap may be inf before any
    lower bound exists."""
    if current_gap > config.tighten_threshold:
        return config.coarse_gap
    return config.target_gap


def _ratio_gap(upper: float, lower: float) -> float:
    if lower <= 0.0:
        return 0.0 if upper <= 0.0 else math.inf
    return (upper - lower) / lower


def _zero_time(exact: bool):
    return Fraction(0) if exact else 0.0


def _one_time(exact: bool):
    return Fraction(1) if exact else 1.0


def _full_extension(assignment, anchor, t_lo, t_hi, flags, instance):
    """Segments of the fixed-assignment extension over [t_lo, t_hi]."""
    back = []
    if compare_event_times(anchor, t_lo) > 0:
        back = extend(assignment, anchor, "backward", t_lo, flags, instance)
    fwd = []
    if compare_event_times(anchor, t_hi) < 0:
        fwd = extend(assignment, anchor, "forward", t_hi, flags, instance)
    return back + fwd


def _first_crossing(seg: TimelineSegment, incumbent: SolutionTimeline, direction: int):
    """Earliest travel-order time in `seg` where its objective rises to meet
    the incumbent's, or None if it stays strictly below."""
    lo, hi = seg.t_start, seg.t_end
    pieces = [
        p
        for p in incumbent.segments
        if compare_event_times(p.t_end, lo) > 0 and compare_event_times(p.t_start, hi) < 0
    ]
    if direction < 0:
        pieces.reverse()
    for piece in pieces:
        a = lo if compare_event_times(piece.t_start, lo) < 0 else piece.t_start
        b = hi if compare_event_times(piece.t_end, hi) > 0 else piece.t_end
        if compare_event_times(a, b) >= 0:
            continue
        diff = seg.poly - piece.poly
        result = quadratic_roots(diff, a, b)
        if result.identically_zero:
            return a if direction > 0 else b
        roots = sorted(result.times, reverse=(direction < 0))
        for root in roots:
            d1 = diff.derivative_at(root) * direction
            scale = 1.0
            if isinstance(d1, float):
                scale = EPS * max(1.0, abs(diff.a) * 2.0, abs(diff.b))
                rising = d1 > scale or (abs(d1) <= scale and diff.a > 0)
            else:
                rising = d1 > 0 or (d1 == 0 and diff.a > 0)
            if rising:
                anchor_side = lo if direction > 0 else hi
                if compare_event_times(root, anchor_side) != 0:
                    return root
    return None


def _partial_extension(assignment, anchor, flags, instance, incumbent, t_lo, t_hi):
    """Extension truncated at the first intersection with the incumbent in
    each direction (the part_ext strategy)."""
    pieces_back: list[TimelineSegment] = []
    if compare_event_times(anchor, t_lo) > 0:
        for seg in iter_extend(assignment, anchor, "backward", t_lo, flags, instance):
            cut = _first_crossing(seg, incumbent, -1)
            if cut is None:
                pieces_back.append(seg)
                continue
            if compare_event_times(cut, seg.t_end) < 0:
                pieces_back.append(
                    TimelineSegment(cut, seg.t_end, seg.assignment, seg.supports, seg.poly)
                )
            break
        pieces_back.reverse()
    pieces_fwd: list[TimelineSegment] = []
    if compare_event_times(anchor, t_hi) < 0:
        for seg in iter_extend(assignment, anchor, "forward", t_hi, flags, instance):
            cut = _first_crossing(seg, incumbent, +1)
            if cut is None:
                pieces_fwd.append(seg)
                continue
            if compare_event_times(seg.t_start, cut) < 0:
                pieces_fwd.append(
                    TimelineSegment(seg.t_start, cut, seg.assignment, seg.supports, seg.poly)
                )
            break
    return pieces_back + pieces_fwd


def _best_unexcluded_peak(timeline: SolutionTimeline, excluded):
    """Highest segment-endpoint value whose time is not excluded, as
    (value, t); ties prefer the smaller time.  None when all are excluded."""
    best = None
    for seg in timeline.segments:
        for t in (seg.t_start, seg.t_end):
            if any(compare_event_times(t, ex) == 0 for ex in excluded):
                continue
            v = seg.poly(t)
            if best is None or v > best[0] or (
                v == best[0] and compare_event_times(t, best[1]) < 0
            ):
                best = (v, t)
    return best


class _SolvedLog:
    """Times already solved statically, with the gap level used."""

    def __init__(self):
        self.entries: list[tuple[object, float]] = []

    def level(self, t):
        best = None
        for st, g in self.entries:
            if compare_event_times(st, t) == 0 and (best is None or g < best):
                best = g
        return best

    def add(self, t, gap_level):
        self.entries.append((t, gap_level))


def solve_minmax(instance: MovingInstance, config: SolverConfig = SolverConfig()) -> KineticResult:
    """Run the iterative min-max algorithm; see the module docstring."""
    t_begin = _time.perf_counter()
    stats = SolveStats()
    exact = config.exact_arithmetic
    work = instance.as_exact() if exact else instance
    t0, t1 = _zero_time(exact), _one_time(exact)
    use_ip = config.static_backend == "exact"

    def remaining() -> float:
        return config.time_limit - (_time.perf_counter() - t_begin)

    def static_at(t, gap_level):
        tick = _time.perf_counter()
        if use_ip:
            cands = enumerate_candidates(work, t)
            sol = solve_exact(
                cands,
                n_objects=work.n,
                n_stations=work.m,
                target_gap=gap_level,
                time_limit=max(remaining(), 0.001),
                backend=config.backend,
            )
        else:
            sol = nn_heuristic(work, t)
        stats.time_static += _time.perf_counter() - tick
        stats.static_solves += 1
        return sol

    def extend_merge(assignment, anchor, incumbent):
        tick = _time.perf_counter()
        if config.flags.part_ext and incumbent is not None:
            segs = _partial_extension(
                assignment, anchor, config.flags, work, incumbent, t0, t1
            )
        else:
            segs = _full_extension(assignment, anchor, t0, t1, config.flags, work)
        stats.events_processed += max(len(segs) - 1, 0)
        if not segs:
            stats.time_extend_merge += _time.perf_counter() - tick
            return incumbent
        part = SolutionTimeline(tuple(segs))
        lo, hi = part.span
        if incumbent is None:
            merged = part
        elif compare_event_times(lo, t0) == 0 and compare_event_times(hi, t1) == 0:
            merged = merge_lower_envelope(incumbent, part)
        else:
            merged = merge_partial(incumbent, part)
        stats.time_extend_merge += _time.perf_counter() - tick
        return merged

    seed_gap = scheduled_gap(math.inf, config) if use_ip else math.inf
    seed = static_at(t0, seed_gap)
    lower_sum = seed.lower_radius_sq
    timeline = extend_merge(seed.assignment, t0, None)

    history: list[tuple[float, float]] = []
    excluded: list[object] = []
    solved = _SolvedLog()
    timed_out = False
    stop = ""
    iterations = 0

    while True:
        iterations += 1
        upper = math.pi * float(timeline.value)
        lower = math.pi * float(lower_sum)
        history.append((upper, lower))
        gap = _ratio_gap(upper, lower)
        if gap <= config.target_gap:
            stop = "gap"
            break
        if remaining() <= 0:
            stop = "time_limit"
            timed_out = True
            break
        if iterations > config.max_iterations:
            stop = "iteration_cap"
            break

        peak = _best_unexcluded_peak(timeline, excluded)
        if peak is None:
            stop = "no_improvement"
            break
        cur, t_star = peak

        if use_ip:
            level = scheduled_gap(gap, config)
            prev = solved.level(t_star)
            if prev is not None and level >= prev:
                if prev <= config.target_gap:
                    excluded.append(t_star)
                    continue
                level = config.target_gap
        else:
            level = math.inf

        sol = static_at(t_star, level)
        if sol.lower_radius_sq > lower_sum:
            lower_sum = sol.lower_radius_sq
        improving = sol.total_radius_sq < cur and not math.isclose(
            float(sol.total_radius_sq), float(cur), rel_tol=1e-12, abs_tol=1e-15
        )
        if improving:
            new_timeline = extend_merge(sol.assignment, t_star, timeline)
            if new_timeline is not timeline:
                timeline = new_timeline
                continue
            # Extension collapsed against the incumbent; treat as no gain.
            improving = False
        if not use_ip:
            stop = "no_improvement"
            break
        solved.add(t_star, level)
        if level <= config.target_gap:
            excluded.append(t_star)

    upper = math.pi * float(timeline.value)
    lower = math.pi * float(lower_sum)
    if lower > upper:
        lower = upper
    stats.stop_reason = stop
    stats.time_total = _time.perf_counter() - t_begin
    return KineticResult(
        timeline=timeline,
        upper=upper,
        lower=lower,
        gap=_ratio_gap(upper, lower),
        iterations=iterations,
        stats=stats,
        timed_out=timed_out,
        history=tuple(history),
    )


def fixed_nn_baseline(
    instance: MovingInstance, k: int = 10, exact_arithmetic: bool = False
) -> KineticResult:
    """Nearest-neighbor solutions at k+1 evenly spaced times, each extended
    over the whole horizon, folded together by the lower envelope.  Provides
    no lower bound."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t_begin = _time.perf_counter()
    stats = SolveStats()
    work = instance.as_exact() if exact_arithmetic else instance
    t0, t1 = _zero_time(exact_arithmetic), _one_time(exact_arithmetic)
    flags = ImprovementFlags()
    timeline = None
    for i in range(k + 1):
        anchor = Fraction(i, k) if exact_arithmetic else i / k
        tick = _time.perf_counter()
        sol = nn_heuristic(work, anchor)
        stats.time_static += _time.perf_counter() - tick
        stats.static_solves += 1
        tick = _time.perf_counter()
        segs = _full_extension(sol.assignment, anchor, t0, t1, flags, work)
        part = SolutionTimeline(tuple(segs))
        stats.events_processed += max(len(segs) - 1, 0)
        timeline = part if timeline is None else merge_lower_envelope(timeline, part)
        stats.time_extend_merge += _time.perf_counter() - tick
    upper = math.pi * float(timeline.value)
    stats.stop_reason = "baseline"
    stats.time_total = _time.perf_counter() - t_begin
    return KineticResult(
        timeline=timeline,
        upper=upper,
        lower=0.0,
        gap=_ratio_gap(upper, 0.0),
        iterations=k + 1,
        stats=stats,
        timed_out=False,
        history=((upper, 0.0),),
    )
