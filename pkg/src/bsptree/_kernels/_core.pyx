# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled polygon kernels.

Hot inner loops of the partition sampler: projections, half-plane
splitting and convex clipping. Mirrors ``pure.py``; see that module for
the contract of each function.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

BACKEND = "cython"

cdef double DUP_EPS = 1e-12


def perimeter(const double[:, ::1] verts):
    cdef Py_ssize_t i, n = verts.shape[0]
    cdef double s = 0.0, dx, dy
    for i in range(n):
        dx = verts[(i + 1) % n, 0] - verts[i, 0]
        dy = verts[(i + 1) % n, 1] - verts[i, 1]
        s += sqrt(dx * dx + dy * dy)
    return s


def area(const double[:, ::1] verts):
    cdef Py_ssize_t i, j, n = verts.shape[0]
    cdef double s = 0.0
    for i in range(n):
        j = (i + 1) % n
        s += verts[i, 0] * verts[j, 1] - verts[j, 0] * verts[i, 1]
    return 0.5 * s


def diameter(const double[:, ::1] verts):
    cdef Py_ssize_t i, j, n = verts.shape[0]
    cdef double best = 0.0, dx, dy, d2
    for i in range(n):
        for j in range(i + 1, n):
            dx = verts[i, 0] - verts[j, 0]
            dy = verts[i, 1] - verts[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > best:
                best = d2
    return sqrt(best)


def project(const double[:, ::1] verts, double ct, double st):
    cdef Py_ssize_t i, n = verts.shape[0]
    cdef double d, lo, hi
    lo = hi = verts[0, 0] * ct + verts[0, 1] * st
    for i in range(1, n):
        d = verts[i, 0] * ct + verts[i, 1] * st
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def projection_lengths(const double[:, ::1] verts, const double[::1] ct_arr, const double[::1] st_arr):
    cdef Py_ssize_t i, k, n = verts.shape[0], m = ct_arr.shape[0]
    cdef double d, lo, hi, ct, st
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    for k in range(m):
        ct = ct_arr[k]
        st = st_arr[k]
        lo = hi = verts[0, 0] * ct + verts[0, 1] * st
        for i in range(1, n):
            d = verts[i, 0] * ct + verts[i, 1] * st
            if d < lo:
                lo = d
            elif d > hi:
                hi = d
        out[k] = hi - lo
    return out_arr


def contains(const double[:, ::1] verts, double x, double y, double eps):
    cdef Py_ssize_t i, j, n = verts.shape[0]
    cdef double cross
    for i in range(n):
        j = (i + 1) % n
        cross = (verts[j, 0] - verts[i, 0]) * (y - verts[i, 1]) - \
                (verts[j, 1] - verts[i, 1]) * (x - verts[i, 0])
        if cross < -eps:
            return False
    return True


def contains_many(const double[:, ::1] verts, const double[:, ::1] pts, double eps):
    cdef Py_ssize_t i, j, k, n = verts.shape[0], m = pts.shape[0]
    cdef double cross
    out_arr = np.ones(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    for k in range(m):
        for i in range(n):
            j = (i + 1) % n
            cross = (verts[j, 0] - verts[i, 0]) * (pts[k, 1] - verts[i, 1]) - \
                    (verts[j, 1] - verts[i, 1]) * (pts[k, 0] - verts[i, 0])
            if cross < -eps:
                out[k] = 0
                break
    return out_arr.view(np.bool_)


cdef _clean(double[:, ::1] pts, Py_ssize_t cnt, double collinear_eps):
    cdef Py_ssize_t i, m = 0, n
    cdef double dx, dy, cross
    buf_arr = np.empty((cnt, 2))
    cdef double[:, ::1] buf = buf_arr
    for i in range(cnt):
        if m > 0:
            dx = pts[i, 0] - buf[m - 1, 0]
            dy = pts[i, 1] - buf[m - 1, 1]
            if dx * dx + dy * dy <= DUP_EPS * DUP_EPS:
                continue
        buf[m, 0] = pts[i, 0]
        buf[m, 1] = pts[i, 1]
        m += 1
    while m > 1:
        dx = buf[0, 0] - buf[m - 1, 0]
        dy = buf[0, 1] - buf[m - 1, 1]
        if dx * dx + dy * dy <= DUP_EPS * DUP_EPS:
            m -= 1
        else:
            break
    if m < 3:
        return np.array(buf_arr[:m])
    out_arr = np.empty((m, 2))
    cdef double[:, ::1] out = out_arr
    n = 0
    for i in range(m):
        cross = (buf[i, 0] - buf[(i + m - 1) % m, 0]) * (buf[(i + 1) % m, 1] - buf[(i + m - 1) % m, 1]) - \
                (buf[i, 1] - buf[(i + m - 1) % m, 1]) * (buf[(i + 1) % m, 0] - buf[(i + m - 1) % m, 0])
        if fabs(cross) > collinear_eps:
            out[n, 0] = buf[i, 0]
            out[n, 1] = buf[i, 1]
            n += 1
    return np.array(out_arr[:n])


def split(const double[:, ::1] verts, double ct, double st, double offset,
          double collinear_eps):
    cdef Py_ssize_t i, j, n = verts.shape[0]
    cdef Py_ssize_t nb = 0, na = 0
    cdef double di, dj, t, px, py
    d_arr = np.empty(n)
    cdef double[::1] d = d_arr
    for i in range(n):
        d[i] = verts[i, 0] * ct + verts[i, 1] * st - offset
    below_arr = np.empty((2 * n + 2, 2))
    above_arr = np.empty((2 * n + 2, 2))
    cdef double[:, ::1] below = below_arr
    cdef double[:, ::1] above = above_arr
    for i in range(n):
        j = (i + 1) % n
        di = d[i]
        dj = d[j]
        if di <= 0.0:
            below[nb, 0] = verts[i, 0]
            below[nb, 1] = verts[i, 1]
            nb += 1
        if di >= 0.0:
            above[na, 0] = verts[i, 0]
            above[na, 1] = verts[i, 1]
            na += 1
        if (di < 0.0 < dj) or (dj < 0.0 < di):
            t = di / (di - dj)
            px = verts[i, 0] + t * (verts[j, 0] - verts[i, 0])
            py = verts[i, 1] + t * (verts[j, 1] - verts[i, 1])
            below[nb, 0] = px
            below[nb, 1] = py
            nb += 1
            above[na, 0] = px
            above[na, 1] = py
            na += 1
    return _clean(below, nb, collinear_eps), _clean(above, na, collinear_eps)


def clip_convex(const double[:, ::1] subject, const double[:, ::1] clipper,
                double collinear_eps):
    cdef Py_ssize_t k, i, m = clipper.shape[0], cnt, ncur
    cdef double ax, ay, ex, ey, ds, dp, t, sx, sy, px, py
    cdef Py_ssize_t cap = 2 * (subject.shape[0] + m) + 8
    cur_arr = np.empty((cap, 2))
    nxt_arr = np.empty((cap, 2))
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] nxt = nxt_arr
    ncur = subject.shape[0]
    for i in range(ncur):
        cur[i, 0] = subject[i, 0]
        cur[i, 1] = subject[i, 1]
    for k in range(m):
        if ncur == 0:
            break
        ax = clipper[k, 0]
        ay = clipper[k, 1]
        ex = clipper[(k + 1) % m, 0] - ax
        ey = clipper[(k + 1) % m, 1] - ay
        cnt = 0
        sx = cur[ncur - 1, 0]
        sy = cur[ncur - 1, 1]
        ds = ex * (sy - ay) - ey * (sx - ax)
        for i in range(ncur):
            px = cur[i, 0]
            py = cur[i, 1]
            dp = ex * (py - ay) - ey * (px - ax)
            if dp >= 0.0:
                if ds < 0.0:
                    t = ds / (ds - dp)
                    nxt[cnt, 0] = sx + t * (px - sx)
                    nxt[cnt, 1] = sy + t * (py - sy)
                    cnt += 1
                nxt[cnt, 0] = px
                nxt[cnt, 1] = py
                cnt += 1
            elif ds >= 0.0:
                t = ds / (ds - dp)
                nxt[cnt, 0] = sx + t * (px - sx)
                nxt[cnt, 1] = sy + t * (py - sy)
                cnt += 1
            sx = px
            sy = py
            ds = dp
        cur, nxt = nxt, cur
        cur_arr, nxt_arr = nxt_arr, cur_arr
        ncur = cnt
    return _clean(cur, ncur, collinear_eps)
