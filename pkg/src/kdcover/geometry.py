"""Planar points, linear trajectories, and squared-distance polynomials.

Coordinates are floats by default.  In exact mode the same types carry
`fractions.Fraction` coordinates instead (see `MovingInstance.as_exact`);
every operation here is written so that it works unchanged for either
scalar type, and root finding dispatches on the coefficient type: float
coefficients get the numerically stable quadratic formula, rational
coefficients get exact `QuadraticNumber` roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .exactarith import QuadraticNumber

__all__ = [
    "EPS",
    "Point2",
    "Trajectory",
    "MovingInstance",
    "QuadraticPoly",
    "RootResult",
    "EventTime",
    "squared_distance_poly",
    "quadratic_roots",
    "compare_event_times",
]

# Default tolerance for float-mode comparisons.  The exact mode needs none.
EPS = 1e-9

Scalar = Union[float, Fraction, int]
EventTime = Union[float, Fraction, QuadraticNumber]


@dataclass(frozen=True)
class Point2:
    x: Scalar
    y: Scalar

    def __post_init__(self):
        for v in (self.x, self.y):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite coordinate {v!r}")


@dataclass(frozen=True)
class Trajectory:
    """Linear motion from `start` at t=0 to `end` at t=1."""

    start: Point2
    end: Point2

    def at(self, t) -> Point2:
        return Point2(
            self.start.x + t * (self.end.x - self.start.x),
            self.start.y + t * (self.end.y - self.start.y),
        )

    @property
    def length_sq(self) -> Scalar:
        dx = self.end.x - self.start.x
        dy = self.end.y - self.start.y
        return dx * dx + dy * dy


@dataclass(frozen=True)
class MovingInstance:
    """Fixed stations plus moving objects over the time horizon [0, 1].

    Indices into `stations` and `objects` are the stable identifiers used
    throughout the package.
    """

    stations: tuple[Point2, ...]
    objects: tuple[Trajectory, ...]
    canvas: tuple[Scalar, Scalar] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.objects and not self.stations:
            raise ValueError("an instance with objects needs at least one station")

    @property
    def n(self) -> int:
        return len(self.objects)

    @property
    def m(self) -> int:
        return len(self.stations)

    def as_exact(self) -> "MovingInstance":
        """Lift all coordinates to exact rationals.

        Float coordinates are converted via `Fraction(float)`, i.e. to the
        exact rational value of the stored double.  All downstream algebra
        is then rounding-free relative to those values.
        """

        def lift(v):
            return v if isinstance(v, (Fraction, int)) else Fraction(v)

        def lift_pt(p: Point2) -> Point2:
            return Point2(lift(p.x), lift(p.y))

        return MovingInstance(
            tuple(lift_pt(s) for s in self.stations),
            tuple(Trajectory(lift_pt(o.start), lift_pt(o.end)) for o in self.objects),
            self.canvas,
            dict(self.metadata),
        )


@dataclass(frozen=True)
class QuadraticPoly:
    """a*t**2 + b*t + c.  Units are squared meters when derived from distances."""

    a: Scalar
    b: Scalar
    c: Scalar

    def __call__(self, t):
        return (self.a * t + self.b) * t + self.c

    def derivative_at(self, t):
        return 2 * self.a * t + self.b

    def __add__(self, other: "QuadraticPoly") -> "QuadraticPoly":
        return QuadraticPoly(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: "QuadraticPoly") -> "QuadraticPoly":
        return QuadraticPoly(self.a - other.a, self.b - other.b, self.c - other.c)

    def __neg__(self) -> "QuadraticPoly":
        return QuadraticPoly(-self.a, -self.b, -self.c)

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0


ZERO_POLY = QuadraticPoly(0, 0, 0)


def squared_distance_poly(station: Point2, obj: Trajectory) -> QuadraticPoly:
    """Squared distance from a fixed station to a moving object, as a
    polynomial in time.  The leading coefficient is the squared trajectory
    length, hence always >= 0 (upward-opening or degenerate)."""
    rx = obj.start.x - station.x
    ry = obj.start.y - station.y
    vx = obj.end.x - obj.start.x
    vy = obj.end.y - obj.start.y
    return QuadraticPoly(vx * vx + vy * vy, 2 * (rx * vx + ry * vy), rx * rx + ry * ry)


@dataclass(frozen=True)
class RootResult:
    """Roots of a quadratic inside a window.

    `identically_zero` flags the degenerate a == b == c == 0 polynomial,
    whose root set is a continuum rather than isolated events; callers
    must apply tie-breaking instead of treating it as an event source.
    """

    times: tuple[EventTime, ...]
    identically_zero: bool = False


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def quadratic_roots(p: QuadraticPoly, t_lo, t_hi) -> RootResult:
    """All real roots of p in the closed window [t_lo, t_hi], ascending.

    Degenerate polynomials are results, not errors: a linear polynomial
    yields at most one root, a nonzero constant none, and the identically
    zero polynomial is reported through the marker on `RootResult`.
    """
    if not (t_lo <= t_hi):
        raise ValueError(f"empty window [{t_lo}, {t_hi}]")
    if _is_exact(p.a) and _is_exact(p.b) and _is_exact(p.c):
        return _roots_exact(p, t_lo, t_hi)
    return _roots_float(p, t_lo, t_hi)


def _roots_float(p: QuadraticPoly, t_lo, t_hi) -> RootResult:
    a, b, c = float(p.a), float(p.b), float(p.c)
    if a == 0.0:
        if b == 0.0:
            return RootResult((), identically_zero=(c == 0.0))
        root = -c / b
        return RootResult((root,) if t_lo <= root <= t_hi else ())
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return RootResult(())
    if disc == 0.0:
        root = -b / (2.0 * a)
        return RootResult((root,) if t_lo <= root <= t_hi else ())
    s = math.sqrt(disc)
    # Citardauq-style split avoids cancellation in the small root.
    q = -(b + s) / 2.0 if b >= 0.0 else -(b - s) / 2.0
    r1, r2 = q / a, c / q
    if r1 > r2:
        r1, r2 = r2, r1
    times = tuple(r for r in (r1, r2) if t_lo <= r <= t_hi)
    return RootResult(times)


def _roots_exact(p: QuadraticPoly, t_lo, t_hi) -> RootResult:
    fa, fb, fc = Fraction(p.a), Fraction(p.b), Fraction(p.c)
    den = math.lcm(fa.denominator, fb.denominator, fc.denominator)
    A = fa.numerator * (den // fa.denominator)
    B = fb.numerator * (den // fb.denominator)
    C = fc.numerator * (den // fc.denominator)

    def in_window(t: QuadraticNumber) -> bool:
        return t.compare(t_lo) >= 0 and t.compare(t_hi) <= 0

    if A == 0:
        if B == 0:
            return RootResult((), identically_zero=(C == 0))
        root = QuadraticNumber.from_rational(Fraction(-C, B))
        return RootResult((root,) if in_window(root) else ())
    disc = B * B - 4 * A * C
    if disc < 0:
        return RootResult(())
    if disc == 0:
        root = QuadraticNumber.from_rational(Fraction(-B, 2 * A))
        return RootResult((root,) if in_window(root) else ())
    lo = QuadraticNumber(-B, -1, 2 * A, disc)
    hi = QuadraticNumber(-B, 1, 2 * A, disc)
    if lo.compare(hi) > 0:
        lo, hi = hi, lo
    return RootResult(tuple(r for r in (lo, hi) if in_window(r)))


def compare_event_times(a, b, eps: float = EPS) -> int:
    """Order two event times: -1, 0 or +1.

    If either side is exact (Fraction or QuadraticNumber) the comparison is
    decided by integer sign computations with no rounding; a plain float
    pair compares with absolute tolerance `eps`.
    """
    if isinstance(a, float) and isinstance(b, float):
        if abs(a - b) <= eps:
            return 0
        return -1 if a < b else 1
    if isinstance(a, QuadraticNumber):
        return a.compare(b)
    if isinstance(b, QuadraticNumber):
        return -b.compare(a)
    fa = Fraction(a)
    fb = Fraction(b)
    if fa == fb:
        return 0
    return -1 if fa < fb else 1
