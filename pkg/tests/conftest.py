import math
import sys
from pathlib import Path
from random import Random

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kdcover.geometry import MovingInstance, Point2, Trajectory  # noqa: E402


def random_instance(n: int, m: int, seed: int, canvas=100.0,
                    len_min=25.0, len_max=50.0) -> MovingInstance:
    """Uniform stations and trajectories, endpoints kept inside the canvas."""
    rng = Random(seed)
    stations = tuple(
        Point2(rng.uniform(0, canvas), rng.uniform(0, canvas)) for _ in range(m)
    )
    objects = []
    for _ in range(n):
        while True:
            sx, sy = rng.uniform(0, canvas), rng.uniform(0, canvas)
            ang = rng.uniform(0, 2 * math.pi)
            length = rng.uniform(len_min, len_max)
            ex, ey = sx + length * math.cos(ang), sy + length * math.sin(ang)
            if 0 <= ex <= canvas and 0 <= ey <= canvas:
                break
        objects.append(Trajectory(Point2(sx, sy), Point2(ex, ey)))
    return MovingInstance(stations, tuple(objects), canvas=(canvas, canvas))


def random_sizes(seed: int, n_max: int, m_max: int) -> tuple[int, int]:
    rng = Random(seed * 7919 + 13)
    return rng.randint(1, n_max), rng.randint(1, m_max)
