import math
from fractions import Fraction

import pytest

from conftest import random_instance, random_sizes
from kdcover.envelope import SolutionTimeline
from kdcover.geometry import MovingInstance, Point2, Trajectory, squared_distance_poly
from kdcover.kinetic import (
    ImprovementFlags,
    SupportChange,
    check_feasible,
    dedup_improve,
    extend,
    next_handover,
    next_support_change,
    resolve_tie,
)
from kdcover.static_cover import enumerate_candidates, nn_heuristic, solve_exact

NO_FLAGS = ImprovementFlags()
ALL_FLAGS = ImprovementFlags(no_dup=True, imp_ext=True, part_ext=True)


def support_change_instance():
    # station at origin; a parked at (2,0), b sweeping (0,1)->(0,3)
    return MovingInstance(
        (Point2(0.0, 0.0),),
        (
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),
            Trajectory(Point2(0.0, 1.0), Point2(0.0, 3.0)),
        ),
    )


def test_next_support_change_example():
    inst = support_change_instance()
    ev = next_support_change(0, (0, 0), 0.0, 1.0, inst)
    assert isinstance(ev, SupportChange)
    assert ev.time == pytest.approx(0.5)
    assert (ev.old_support, ev.new_support) == (0, 1)
    back = next_support_change(0, (0, 0), 1.0, 0.0, inst)
    assert back.time == pytest.approx(0.5)
    assert (back.old_support, back.new_support) == (1, 0)


def test_next_support_change_single_object():
    inst = MovingInstance((Point2(0.0, 0.0),), (Trajectory(Point2(1.0, 0.0), Point2(2.0, 0.0)),))
    assert next_support_change(0, (0,), 0.0, 1.0, inst) is None


def test_resolve_tie_examples():
    inst = MovingInstance(
        (Point2(0.0, 0.0),),
        (
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),
            Trajectory(Point2(0.0, 2.0), Point2(0.0, 4.0)),
        ),
    )
    assert resolve_tie(0, [0, 1], 0.0, inst) == 1
    assert resolve_tie(0, [1], 0.0, inst) == 1
    mirrored = MovingInstance(
        (Point2(0.0, 0.0),),
        (
            Trajectory(Point2(1.0, 0.0), Point2(1.0, 1.0)),
            Trajectory(Point2(-1.0, 0.0), Point2(-1.0, -1.0)),
        ),
    )
    assert resolve_tie(0, [0, 1], 0.0, mirrored) == 0


def handover_instance():
    return MovingInstance(
        (Point2(0.0, 0.0), Point2(10.0, 0.0)),
        (
            Trajectory(Point2(3.0, 0.0), Point2(7.0, 0.0)),  # b, assigned to c1
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),  # a, assigned to c1
            Trajectory(Point2(9.0, 0.0), Point2(9.0, 0.0)),  # d, assigned to c2
        ),
    )


def test_next_handover_examples():
    ev = next_handover((0, 1), (0, 0, 1), 0.0, 1.0, handover_instance())
    assert ev is not None
    assert ev.time == pytest.approx(43 / 80)
    assert (ev.from_station, ev.to_station, ev.obj) == (0, 1, 0)

    symmetric = MovingInstance(
        (Point2(0.0, 0.0), Point2(10.0, 0.0)),
        (
            Trajectory(Point2(4.0, 0.0), Point2(6.0, 0.0)),
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),
            Trajectory(Point2(8.0, 0.0), Point2(8.0, 0.0)),
        ),
    )
    ev = next_handover((0, 1), (0, 0, 1), 0.0, 1.0, symmetric)
    assert ev.time == pytest.approx(0.5)

    toward = MovingInstance(
        (Point2(0.0, 0.0), Point2(10.0, 0.0)),
        (
            Trajectory(Point2(7.0, 0.0), Point2(3.0, 0.0)),  # moving toward c1
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),
            Trajectory(Point2(9.0, 0.0), Point2(9.0, 0.0)),
        ),
    )
    assert next_handover((0, 1), (0, 0, 1), 0.0, 1.0, toward) is None


def test_dedup_improve_examples():
    inst = MovingInstance(
        (Point2(0.0, 0.0), Point2(2.5, 0.0)),
        (
            Trajectory(Point2(1.0, 0.0), Point2(1.0, 0.0)),
            Trajectory(Point2(2.0, 0.0), Point2(2.0, 0.0)),
            Trajectory(Point2(3.0, 0.0), Point2(3.0, 0.0)),
        ),
    )
    improved = dedup_improve((0, 0, 1), 0.0, inst)
    assert improved == (0, 1, 1)
    # fixpoint / idempotence
    assert dedup_improve(improved, 0.0, inst) == improved
    single = MovingInstance((Point2(0.0, 0.0),), (Trajectory(Point2(1.0, 0.0), Point2(1.0, 0.0)),))
    assert dedup_improve((0,), 0.0, single) == (0,)


def cost_at(assignment, t, inst):
    total = 0.0
    for s in range(inst.m):
        best = 0.0
        for j, a in enumerate(assignment):
            if a == s:
                best = max(best, float(squared_distance_poly(inst.stations[s], inst.objects[j])(t)))
        total += best
    return total


def test_dedup_never_increases_cost():
    from random import Random

    for seed in range(100):
        n, m = random_sizes(seed, 12, 4)
        inst = random_instance(n, m, seed)
        rng = Random(seed)
        assignment = tuple(rng.randrange(m) for _ in range(n))
        t = rng.random()
        improved = dedup_improve(assignment, t, inst)
        assert cost_at(improved, t, inst) <= cost_at(assignment, t, inst) * (1 + 1e-9)
        assert dedup_improve(improved, t, inst) == improved


def test_extend_examples():
    inst = support_change_instance()
    segs = extend((0, 0), 0.0, "forward", 1.0, NO_FLAGS, inst)
    assert len(segs) == 2
    assert segs[0].t_end == pytest.approx(0.5)
    assert segs[0].supports == (0,)
    assert segs[1].supports == (1,)

    single = MovingInstance((Point2(0.0, 0.0),), (Trajectory(Point2(3.0, 0.0), Point2(3.0, 0.0)),))
    segs = extend((0,), 0.0, "forward", 1.0, NO_FLAGS, single)
    assert len(segs) == 1 and segs[0].poly(0.5) == pytest.approx(9.0)

    crossing = MovingInstance(
        (Point2(0.0, 0.0), Point2(10.0, 0.0)),
        (Trajectory(Point2(2.0, 0.0), Point2(8.0, 0.0)),),
    )
    plain = extend((0,), 0.0, "forward", 1.0, NO_FLAGS, crossing)
    assert len(plain) == 1  # no handover: assignment never changes
    assert plain[0].poly(1.0) == pytest.approx(64.0)
    improved = extend((0,), 0.0, "forward", 1.0, ImprovementFlags(imp_ext=True), crossing)
    assert len(improved) == 2
    assert improved[0].t_end == pytest.approx(0.5)
    assert improved[1].assignment == (1,)
    assert improved[1].poly(1.0) == pytest.approx(4.0)


def test_extend_preserves_feasibility_random():
    for seed in range(30):
        n, m = random_sizes(seed, 20, 5)
        inst = random_instance(n, m, seed)
        sol = nn_heuristic(inst, 0.0)
        for flags in (NO_FLAGS, ALL_FLAGS):
            segs = extend(sol.assignment, 0.0, "forward", 1.0, flags, inst)
            report = check_feasible(segs, inst, 400)
            assert report.ok, (seed, flags, report)
            assert segs[0].t_start == 0.0 and segs[-1].t_end == 1.0


def test_event_counts_within_pairwise_bounds():
    for seed in range(10):
        n, m = random_sizes(seed, 15, 4)
        inst = random_instance(n, m, seed)
        sol = nn_heuristic(inst, 0.0)
        plain = extend(sol.assignment, 0.0, "forward", 1.0, NO_FLAGS, inst)
        assert len(plain) - 1 <= m * n * n
        rich = extend(sol.assignment, 0.0, "forward", 1.0, ImprovementFlags(imp_ext=True), inst)
        assert len(rich) - 1 <= m * m * n**3


def test_support_change_polys_equal_at_event():
    inst = support_change_instance().as_exact()
    ev = next_support_change(0, (0, 0), Fraction(0), Fraction(1), inst)
    p_old = squared_distance_poly(inst.stations[0], inst.objects[ev.old_support])
    p_new = squared_distance_poly(inst.stations[0], inst.objects[ev.new_support])
    assert p_old(ev.time) == p_new(ev.time)  # exact equality

    for seed in range(8):
        n, m = random_sizes(seed, 8, 3)
        inst = random_instance(n, m, seed).as_exact()
        sol = nn_heuristic(inst, Fraction(0))
        segs = extend(sol.assignment, Fraction(0), "forward", Fraction(1), NO_FLAGS, inst)
        for prev, cur in zip(segs, segs[1:]):
            for s in range(m):
                if prev.supports[s] != cur.supports[s] and prev.assignment == cur.assignment:
                    a = squared_distance_poly(inst.stations[s], inst.objects[prev.supports[s]])
                    b = squared_distance_poly(inst.stations[s], inst.objects[cur.supports[s]])
                    assert a(cur.t_start) == b(cur.t_start)


def test_forward_backward_boundaries_agree():
    for seed in range(15):
        n, m = random_sizes(seed, 15, 4)
        inst = random_instance(n, m, seed)
        sol = nn_heuristic(inst, 0.0)
        fwd = extend(sol.assignment, 0.0, "forward", 1.0, NO_FLAGS, inst)
        bwd = extend(sol.assignment, 1.0, "backward", 0.0, NO_FLAGS, inst)
        fb = sorted(s.t_end for s in fwd[:-1])
        bb = sorted(s.t_end for s in bwd[:-1])
        assert len(fb) == len(bb)
        for x, y in zip(fb, bb):
            assert x == pytest.approx(y, abs=1e-9)


def test_check_feasible_flags_bad_assignment():
    inst = MovingInstance(
        (Point2(0.0, 0.0), Point2(10.0, 0.0)),
        (
            Trajectory(Point2(1.0, 0.0), Point2(1.0, 0.0)),
            Trajectory(Point2(9.0, 0.0), Point2(9.0, 0.0)),
        ),
    )
    good = extend((0, 1), 0.0, "forward", 1.0, NO_FLAGS, inst)
    assert check_feasible(good, inst, 100).ok
    bad = [
        good[0].__class__(0.0, 1.0, (0, 0), (0, None), good[0].poly)
    ]  # claims station 0 covers both with radius 1
    report = check_feasible(bad, inst, 100)
    assert not report.ok and report.worst_violation > 1.0
    empty = MovingInstance((Point2(0.0, 0.0),), ())
    assert check_feasible(extend((), 0.0, "forward", 1.0, NO_FLAGS, empty), empty, 100).ok


def test_extend_with_exact_static_seed():
    for seed in range(8):
        n, m = random_sizes(seed, 12, 3)
        inst = random_instance(n, m, seed)
        sol = solve_exact(enumerate_candidates(inst, 0.0), n, m)
        segs = extend(sol.assignment, 0.0, "forward", 1.0, ALL_FLAGS, inst)
        assert check_feasible(segs, inst, 500).ok
        timeline = SolutionTimeline(tuple(segs))
        assert timeline.segments[0].poly(0.0) <= sol.total_radius_sq * (1 + 1e-9)
