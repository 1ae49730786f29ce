# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isfinite

cnp.import_array()

cdef double _EPS_RADIUS = 1e-12
cdef double _INVPHI = 0.6180339887498949


cdef double _value(double cx, double cy, const double[:, ::1] pts) noexcept nogil:
    cdef Py_ssize_t i, n = pts.shape[0]
    cdef double dx, dy, rsum = 0.0, mean, acc = 0.0, r
    for i in range(n):
        dx = cx - pts[i, 0]
        dy = cy - pts[i, 1]
        rsum += sqrt(dx * dx + dy * dy)
    mean = rsum / n
    for i in range(n):
        dx = cx - pts[i, 0]
        dy = cy - pts[i, 1]
        r = sqrt(dx * dx + dy * dy) - mean
        acc += r * r
    return acc


cdef double _value_grad(double cx, double cy, const double[:, ::1] pts,
                        double* gx, double* gy) noexcept nogil:
    cdef Py_ssize_t i, n = pts.shape[0]
    cdef double dx, dy, r, rsum = 0.0, sdx = 0.0, sdy = 0.0, ux = 0.0, uy = 0.0
    cdef double mean, acc = 0.0
    for i in range(n):
        dx = cx - pts[i, 0]
        dy = cy - pts[i, 1]
        r = sqrt(dx * dx + dy * dy)
        rsum += r
        sdx += dx
        sdy += dy
        if r >= _EPS_RADIUS:
            ux += dx / r
            uy += dy / r
    mean = rsum / n
    for i in range(n):
        dx = cx - pts[i, 0]
        dy = cy - pts[i, 1]
        r = sqrt(dx * dx + dy * dy) - mean
        acc += r * r
    gx[0] = 2.0 * sdx - (2.0 / n) * rsum * ux
    gy[0] = 2.0 * sdy - (2.0 / n) * rsum * uy
    return acc


def circle_value_grad(c, pts):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double gx, gy, v
    v = _value_grad(float(c[0]), float(c[1]), p, &gx, &gy)
    return v, np.array([gx, gy])


cdef double _golden(double cx, double cy, double dx, double dy, double hi,
                    const double[:, ::1] pts, double* best) noexcept nogil:
    cdef double lo = 0.0, x1, x2, f1, f2, fh, tol
    tol = 1e-12 * (hi if hi > 1.0 else 1.0)
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _value(cx + x1 * dx, cy + x1 * dy, pts)
    f2 = _value(cx + x2 * dx, cy + x2 * dy, pts)
    while hi - lo > tol:
        if f1 <= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _value(cx + x1 * dx, cy + x1 * dy, pts)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _value(cx + x2 * dx, cy + x2 * dy, pts)
    fh = _value(cx + hi * dx, cy + hi * dy, pts)
    if f1 <= f2 and f1 <= fh:
        best[0] = f1
        return x1
    if f2 <= fh:
        best[0] = f2
        return x2
    best[0] = fh
    return hi


def frank_wolfe(pts, verts, c0, double tol, long max_iter):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const double[:, ::1] vt = np.ascontiguousarray(verts, dtype=np.float64)
    cdef Py_ssize_t nv = vt.shape[0], k, i, j
    alpha_arr = np.full(nv, 1.0 / nv)
    cdef double[::1] alpha = alpha_arr
    cdef double cx = float(c0[0]), cy = float(c0[1])
    cdef double gx, gy, value, score, best_score, worst_score, gap = 0.0, away_gap
    cdef double dx, dy, gmax, gamma, trial, trial_value, cand_value
    cdef bint forward, have_gamma
    cdef long t = 0, n_ls = 0
    with nogil:
        value = _value_grad(cx, cy, p, &gx, &gy)
        while True:
            if not (isfinite(value) and isfinite(gx) and isfinite(gy)):
                gap = INFINITY - INFINITY
                break
            i = 0
            best_score = vt[0, 0] * gx + vt[0, 1] * gy
            j = -1
            worst_score = 0.0
            for k in range(nv):
                score = vt[k, 0] * gx + vt[k, 1] * gy
                if score < best_score:
                    best_score = score
                    i = k
                if alpha[k] > 0.0 and (j < 0 or score > worst_score):
                    worst_score = score
                    j = k
            gap = gx * (cx - vt[i, 0]) + gy * (cy - vt[i, 1])
            if gap <= tol or t >= max_iter:
                break
            away_gap = gx * (vt[j, 0] - cx) + gy * (vt[j, 1] - cy)
            forward = gap >= away_gap or alpha[j] >= 1.0
            if forward:
                dx = vt[i, 0] - cx
                dy = vt[i, 1] - cy
                gmax = 1.0
            else:
                dx = cx - vt[j, 0]
                dy = cy - vt[j, 1]
                gmax = alpha[j] / (1.0 - alpha[j])
            have_gamma = False
            if forward:
                trial = 2.0 / (t + 2.0)
                if trial > gmax:
                    trial = gmax
                trial_value = _value(cx + trial * dx, cy + trial * dy, p)
                if trial_value <= value:
                    gamma = trial
                    cand_value = trial_value
                    have_gamma = True
            if not have_gamma:
                n_ls += 1
                gamma = _golden(cx, cy, dx, dy, gmax, p, &cand_value)
                if cand_value > value:
                    break
            if forward:
                for k in range(nv):
                    alpha[k] *= 1.0 - gamma
                alpha[i] += gamma
            else:
                for k in range(nv):
                    alpha[k] *= 1.0 + gamma
                if gamma >= gmax:
                    alpha[j] = 0.0
                else:
                    alpha[j] -= gamma
            cx = cx + gamma * dx
            cy = cy + gamma * dy
            value = _value_grad(cx, cy, p, &gx, &gy)
            t += 1
    return np.array([cx, cy]), value, t, gap, n_ls


def dijkstra_all_pairs(w):
    """One Dijkstra per source with an O(n^2) array scan (dense graphs, small n)."""
    cdef double[:, ::1] wt = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wt.shape[0], src, it, u, v
    out_arr = np.full((n, n), np.inf)
    cdef double[:, ::1] out = out_arr
    done_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] done = done_arr
    cdef double best, nd
    with nogil:
        for src in range(n):
            for v in range(n):
                done[v] = 0
            out[src, src] = 0.0
            for it in range(n):
                u = -1
                best = INFINITY
                for v in range(n):
                    if not done[v] and out[src, v] < best:
                        best = out[src, v]
                        u = v
                if u < 0:
                    break
                done[u] = 1
                for v in range(n):
                    if v != u and not done[v] and isfinite(wt[u, v]):
                        nd = best + wt[u, v]
                        if nd < out[src, v]:
                            out[src, v] = nd
    return out_arr


def floyd_warshall(w):
    d_arr = np.array(w, dtype=np.float64, order="C")
    cdef double[:, ::1] d = d_arr
    cdef Py_ssize_t n = d.shape[0], i, j, k
    cdef double dik, nd
    with nogil:
        for i in range(n):
            d[i, i] = 0.0
        for k in range(n):
            for i in range(n):
                dik = d[i, k]
                if not isfinite(dik):
                    continue
                for j in range(n):
                    nd = dik + d[k, j]
                    if nd < d[i, j]:
                        d[i, j] = nd
    return d_arr


def jacobi_eigh(a, double tol=1e-14, int max_sweeps=100):
    a_arr = np.array(a, dtype=np.float64, order="C")
    cdef double[:, ::1] m = a_arr
    cdef Py_ssize_t n = m.shape[0], p, q, k
    v_arr = np.eye(n)
    cdef double[:, ::1] v = v_arr
    cdef double scale = 0.0, off, apq, theta, t, cs, sn, x, y
    cdef int sweeps = 0
    for p in range(n):
        for q in range(n):
            scale += m[p, q] * m[p, q]
    scale = sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), v_arr, 0
    with nogil:
        while sweeps < max_sweeps:
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += m[p, q] * m[p, q]
            if sqrt(off) <= tol * scale:
                break
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p, q]
                    if apq == 0.0:
                        continue
                    theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    cs = 1.0 / sqrt(t * t + 1.0)
                    sn = t * cs
                    for k in range(n):
                        x = m[k, p]
                        y = m[k, q]
                        m[k, p] = cs * x - sn * y
                        m[k, q] = sn * x + cs * y
                    for k in range(n):
                        x = m[p, k]
                        y = m[q, k]
                        m[p, k] = cs * x - sn * y
                        m[q, k] = sn * x + cs * y
                    m[p, q] = 0.0
                    m[q, p] = 0.0
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = cs * x - sn * y
                        v[k, q] = sn * x + cs * y
    return np.diag(a_arr).copy(), v_arr, sweeps
