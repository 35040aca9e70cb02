"""Piecewise-quadratic solution timelines over a time window.

A timeline is a contiguous list of segments, each holding a constant
object-to-station assignment, the per-station support objects, and the
segment's objective polynomial.  Solver-produced timelines store the
objective as the sum of squared support radii (area / pi) so exact mode
keeps rational coefficients; the functions here are unit-agnostic and
evaluate whatever polynomial a segment carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .geometry import (
    EPS,
    QuadraticPoly,
    RootResult,
    compare_event_times,
    quadratic_roots,
)

__all__ = [
    "Assignment",
    "TimelineSegment",
    "SolutionTimeline",
    "timeline_cost",
    "segment_at",
    "argmax_timeline",
    "intersect_quadratics",
    "merge_lower_envelope",
]

Assignment = tuple[int, ...]

# Structural tolerance for boundary bookkeeping in float mode (segment
# elision, crossing-at-endpoint suppression).  Tighter than the user-facing
# EPS so legitimately short segments survive.
_T_EPS = 1e-12


@dataclass(frozen=True)
class TimelineSegment:
    """Maximal interval with a fixed assignment.

    `supports[i]` is the object defining station i's radius (None when the
    station has no assigned objects), and `poly` evaluated anywhere in the
    segment equals the sum over stations of the support's squared distance.
    """

    t_start: object
    t_end: object
    assignment: Assignment
    supports: tuple[Optional[int], ...]
    poly: QuadraticPoly


@dataclass(frozen=True)
class SolutionTimeline:
    """Contiguous segments; `value` is the peak objective over the span."""

    segments: tuple[TimelineSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("timeline needs at least one segment")
        prev = self.segments[0]
        for seg in self.segments[1:]:
            if compare_event_times(prev.t_end, seg.t_start, _T_EPS) != 0:
                raise ValueError(
                    f"gap or overlap between segments at {prev.t_end!r} / {seg.t_start!r}"
                )
            prev = seg
        t_peak, value = argmax_timeline(self)
        object.__setattr__(self, "t_peak", t_peak)
        object.__setattr__(self, "value", value)

    @property
    def span(self):
        return self.segments[0].t_start, self.segments[-1].t_end


def segment_at(timeline: SolutionTimeline, t) -> TimelineSegment:
    """Covering segment for t; at a shared boundary the later segment wins
    (an assignment change may drop the objective discontinuously)."""
    lo, hi = timeline.span
    if compare_event_times(t, lo, _T_EPS) < 0 or compare_event_times(t, hi, _T_EPS) > 0:
        raise ValueError(f"time {t!r} outside timeline span [{lo!r}, {hi!r}]")
    for seg in reversed(timeline.segments):
        if compare_event_times(seg.t_start, t, _T_EPS) <= 0:
            return seg
    return timeline.segments[0]


def timeline_cost(timeline: SolutionTimeline, t):
    """Objective of the covering segment at t."""
    return segment_at(timeline, t).poly(t)


def argmax_timeline(timeline: SolutionTimeline | tuple) -> tuple:
    """Peak (t, value) over the whole span.

    Every segment objective opens upward, so only segment endpoints are
    inspected; ties resolve to the smallest t.
    """
    segments = timeline.segments if isinstance(timeline, SolutionTimeline) else tuple(timeline)
    if not segments:
        raise ValueError("argmax of an empty timeline")
    best_t = None
    best_v = None
    for seg in segments:
        for t in (seg.t_start, seg.t_end):
            v = seg.poly(t)
            if best_v is None or v > best_v:
                best_t, best_v = t, v
    return best_t, best_v


def intersect_quadratics(f: QuadraticPoly, g: QuadraticPoly, window) -> RootResult:
    """Crossing times of two objectives inside the window; an identically
    equal pair is reported through the marker, not as isolated roots."""
    lo, hi = window
    return quadratic_roots(f - g, lo, hi)


def _sign_ahead(p: QuadraticPoly, t, direction: int = 1) -> int:
    """Sign of p immediately ahead of t in the travel direction.

    Looks at the value, then the first derivative, then the curvature, each
    with a coefficient-scaled tolerance in float mode and exactly otherwise.
    Returns 0 only for the identically-zero polynomial on a neighborhood.
    """
    v = p(t)
    if isinstance(v, float):
        scale = max(1.0, abs(float(p.a)), abs(float(p.b)), abs(float(p.c)))
        tol = EPS * scale
        if abs(v) > tol:
            return 1 if v > 0 else -1
        dv = p.derivative_at(t) * direction
        if abs(dv) > tol:
            return 1 if dv > 0 else -1
        a = float(p.a)
        if abs(a) > tol:
            return 1 if a > 0 else -1
        return 0
    if v != 0:
        return 1 if v > 0 else -1
    dv = p.derivative_at(t) * direction
    if dv != 0:
        return 1 if dv > 0 else -1
    if p.a != 0:
        return 1 if p.a > 0 else -1
    return 0


def _strictly_inside(t, lo, hi) -> bool:
    if isinstance(t, float) and isinstance(lo, float) and isinstance(hi, float):
        return t > lo + _T_EPS and t < hi - _T_EPS
    return compare_event_times(t, lo, _T_EPS) > 0 and compare_event_times(t, hi, _T_EPS) < 0


def _merge_core(a_segments, b_segments) -> list[TimelineSegment]:
    """Pointwise-minimum scan over two segment lists covering the same span."""
    out: list[TimelineSegment] = []
    i = j = 0
    u = a_segments[0].t_start

    def emit(x, y, seg_src):
        if compare_event_times(x, y, _T_EPS) >= 0:
            return
        if out and out[-1].poly == seg_src.poly and out[-1].assignment == seg_src.assignment \
                and out[-1].supports == seg_src.supports:
            prev = out[-1]
            out[-1] = TimelineSegment(prev.t_start, y, prev.assignment, prev.supports, prev.poly)
        else:
            out.append(TimelineSegment(x, y, seg_src.assignment, seg_src.supports, seg_src.poly))

    while i < len(a_segments) and j < len(b_segments):
        sa, sb = a_segments[i], b_segments[j]
        v = sa.t_end if compare_event_times(sa.t_end, sb.t_end, _T_EPS) <= 0 else sb.t_end
        if compare_event_times(u, v, _T_EPS) < 0:
            diff = sa.poly - sb.poly
            roots = quadratic_roots(diff, u, v)
            cuts = [r for r in roots.times if _strictly_inside(r, u, v)]
            pieces = [u] + cuts + [v]
            for x, y in zip(pieces, pieces[1:]):
                if compare_event_times(x, y, _T_EPS) >= 0:
                    continue
                s = _sign_ahead(diff, x)
                emit(x, y, sa if s <= 0 else sb)
        u = v
        if compare_event_times(sa.t_end, v, _T_EPS) <= 0:
            i += 1
        if compare_event_times(sb.t_end, v, _T_EPS) <= 0:
            j += 1
    # Snap the stitched boundaries so contiguity is exact object equality.
    fixed: list[TimelineSegment] = []
    for seg in out:
        if fixed:
            seg = TimelineSegment(fixed[-1].t_end, seg.t_end, seg.assignment, seg.supports, seg.poly)
        fixed.append(seg)
    return fixed


def merge_lower_envelope(a: SolutionTimeline, b: SolutionTimeline) -> SolutionTimeline:
    """Pointwise minimum of two timelines over the same span.

    The result carries the assignment of the cheaper input everywhere; on
    subintervals where the two agree identically, the first argument wins.
    Boundaries are the union of input boundaries plus crossing points; the
    scan is linear in the segment counts.
    """
    alo, ahi = a.span
    blo, bhi = b.span
    if compare_event_times(alo, blo, _T_EPS) != 0 or compare_event_times(ahi, bhi, _T_EPS) != 0:
        raise ValueError("merge requires timelines over the same span")
    merged = _merge_core(a.segments, b.segments)
    # Preserve exact span endpoints from the first argument.
    first = merged[0]
    merged[0] = TimelineSegment(alo, first.t_end, first.assignment, first.supports, first.poly)
    last = merged[-1]
    merged[-1] = TimelineSegment(last.t_start, ahi, last.assignment, last.supports, last.poly)
    return SolutionTimeline(tuple(merged))


def slice_timeline(timeline: SolutionTimeline, lo, hi) -> SolutionTimeline:
    """Restriction of a timeline to [lo, hi], splitting boundary segments."""
    if compare_event_times(lo, hi, _T_EPS) >= 0:
        raise ValueError("empty slice window")
    parts: list[TimelineSegment] = []
    for seg in timeline.segments:
        if compare_event_times(seg.t_end, lo, _T_EPS) <= 0:
            continue
        if compare_event_times(seg.t_start, hi, _T_EPS) >= 0:
            break
        s = lo if compare_event_times(seg.t_start, lo, _T_EPS) < 0 else seg.t_start
        e = hi if compare_event_times(seg.t_end, hi, _T_EPS) > 0 else seg.t_end
        if compare_event_times(s, e, _T_EPS) < 0:
            parts.append(TimelineSegment(s, e, seg.assignment, seg.supports, seg.poly))
    return SolutionTimeline(tuple(parts))


def merge_partial(full: SolutionTimeline, part: SolutionTimeline) -> SolutionTimeline:
    """Lower envelope of a full-span timeline with a partial one.

    Outside the partial span the full timeline is kept unchanged; inside,
    the pointwise minimum is taken (ties keep `full`'s assignment).
    """
    flo, fhi = full.span
    plo, phi = part.span
    pieces: list[TimelineSegment] = []
    if compare_event_times(flo, plo, _T_EPS) < 0:
        pieces.extend(slice_timeline(full, flo, plo).segments)
    inner = _merge_core(slice_timeline(full, plo, phi).segments, part.segments)
    if pieces and inner:
        head = inner[0]
        inner[0] = TimelineSegment(pieces[-1].t_end, head.t_end, head.assignment, head.supports, head.poly)
    pieces.extend(inner)
    if compare_event_times(phi, fhi, _T_EPS) < 0:
        tail = slice_timeline(full, phi, fhi).segments
        if pieces:
            head = tail[0]
            tail = (TimelineSegment(pieces[-1].t_end, head.t_end, head.assignment, head.supports, head.poly),) + tail[1:]
        pieces.extend(tail)
    first = pieces[0]
    pieces[0] = TimelineSegment(flo, first.t_end, first.assignment, first.supports, first.poly)
    last = pieces[-1]
    pieces[-1] = TimelineSegment(last.t_start, fhi, last.assignment, last.supports, last.poly)
    return SolutionTimeline(tuple(pieces))
