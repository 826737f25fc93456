import numpy as np
import pytest

from bsptree.geometry import ConvexPolygon


def random_convex_polygon(gen, nmin=3, nmax=12, scale=1.0):
    """Random strictly convex polygon: points on a random ellipse at
    well-separated sorted angles, then rotated and translated."""
    while True:
        n = int(gen.integers(nmin, nmax + 1))
        ang = np.sort(gen.uniform(0.0, 2.0 * np.pi, size=n))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]]))
        if gaps.min() > 0.15:
            break
    a = scale * gen.uniform(0.5, 2.0)
    b = scale * gen.uniform(0.5, 2.0)
    rot = gen.uniform(0.0, np.pi)
    c, s = np.cos(rot), np.sin(rot)
    x = a * np.cos(ang)
    y = b * np.sin(ang)
    verts = np.column_stack([c * x - s * y, s * x + c * y])
    verts += gen.uniform(-2.0, 2.0, size=2)
    return ConvexPolygon(verts)


@pytest.fixture
def rc_poly():
    return random_convex_polygon
