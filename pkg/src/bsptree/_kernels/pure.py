"""Pure-python (numpy) implementations of the polygon kernels.

Fallback backend used when the compiled extension is unavailable. The
compiled backend in ``_core.pyx`` implements the same functions with the
same semantics; parity is checked in ``tests/test_kernels.py``.

All functions take vertex arrays of shape (n, 2), float64, in CCW order.
They neither validate nor copy their inputs; validation lives in
``bsptree.geometry``.
"""

import numpy as np

BACKEND = "python"

# vertices closer than this are merged when cleaning clip output
_DUP_EPS = 1e-12


def perimeter(verts):
    edges = np.roll(verts, -1, axis=0) - verts
    return float(np.sqrt((edges * edges).sum(axis=1)).sum())


def area(verts):
    x = verts[:, 0]
    y = verts[:, 1]
    return float(0.5 * (x * np.roll(y, -1) - np.roll(x, -1) * y).sum())


def diameter(verts):
    # O(n^2) pairwise max; n is small (polygons rarely exceed ~20 vertices)
    diff = verts[:, None, :] - verts[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=2)).max())


def project(verts, ct, st):
    dots = verts[:, 0] * ct + verts[:, 1] * st
    return float(dots.min()), float(dots.max())


def projection_lengths(verts, ct_arr, st_arr):
    dots = np.outer(ct_arr, verts[:, 0]) + np.outer(st_arr, verts[:, 1])
    return dots.max(axis=1) - dots.min(axis=1)


def contains(verts, x, y, eps):
    nxt = np.roll(verts, -1, axis=0)
    cross = (nxt[:, 0] - verts[:, 0]) * (y - verts[:, 1]) - (
        nxt[:, 1] - verts[:, 1]
    ) * (x - verts[:, 0])
    return bool((cross >= -eps).all())


def contains_many(verts, pts, eps):
    nxt = np.roll(verts, -1, axis=0)
    ex = nxt[:, 0] - verts[:, 0]
    ey = nxt[:, 1] - verts[:, 1]
    cross = ex[None, :] * (pts[:, 1, None] - verts[None, :, 1]) - ey[None, :] * (
        pts[:, 0, None] - verts[None, :, 0]
    )
    return (cross >= -eps).all(axis=1)


def _clean(pts, collinear_eps):
    """Drop consecutive duplicates and merge collinear runs."""
    if len(pts) == 0:
        return np.empty((0, 2))
    out = [pts[0]]
    for p in pts[1:]:
        q = out[-1]
        if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 > _DUP_EPS * _DUP_EPS:
            out.append(p)
    while len(out) > 1:
        p, q = out[0], out[-1]
        if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 <= _DUP_EPS * _DUP_EPS:
            out.pop()
        else:
            break
    n = len(out)
    if n < 3:
        return np.asarray(out, dtype=float).reshape(-1, 2)
    keep = []
    for i in range(n):
        a = out[i - 1]
        b = out[i]
        c = out[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > collinear_eps:
            keep.append(b)
    return np.asarray(keep, dtype=float).reshape(-1, 2)


def split(verts, ct, st, offset, collinear_eps):
    """Clip a convex CCW polygon by the line x*ct + y*st = offset.

    Returns (below, above) vertex arrays; either may have fewer than 3
    vertices when the line misses or grazes the polygon.
    """
    d = verts[:, 0] * ct + verts[:, 1] * st - offset
    n = len(verts)
    below = []
    above = []
    for i in range(n):
        j = (i + 1) % n
        di = d[i]
        dj = d[j]
        vi = verts[i]
        if di <= 0.0:
            below.append(vi)
        if di >= 0.0:
            above.append(vi)
        if (di < 0.0 < dj) or (dj < 0.0 < di):
            t = di / (di - dj)
            p = vi + t * (verts[j] - vi)
            below.append(p)
            above.append(p)
    return _clean(below, collinear_eps), _clean(above, collinear_eps)


def clip_convex(subject, clipper, collinear_eps):
    """Intersection of two convex CCW polygons (Sutherland-Hodgman)."""
    out = [tuple(p) for p in subject]
    m = len(clipper)
    for k in range(m):
        if not out:
            break
        ax, ay = clipper[k]
        bx, by = clipper[(k + 1) % m]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        sx, sy = inp[-1]
        ds = ex * (sy - ay) - ey * (sx - ax)
        for px, py in inp:
            dp = ex * (py - ay) - ey * (px - ax)
            if dp >= 0.0:
                if ds < 0.0:
                    t = ds / (ds - dp)
                    out.append((sx + t * (px - sx), sy + t * (py - sy)))
                out.append((px, py))
            elif ds >= 0.0:
                t = ds / (ds - dp)
                out.append((sx + t * (px - sx), sy + t * (py - sy)))
            sx, sy, ds = px, py, dp
    return _clean([np.asarray(p) for p in out], collinear_eps)
