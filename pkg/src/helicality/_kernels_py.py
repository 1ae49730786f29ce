"""Pure-Python/NumPy implementations of the hot kernels.

These mirror ``_kernels_c.pyx`` function for function and are used when the
compiled extension is unavailable (or when ``HELICALITY_PURE_PYTHON=1``).
"""
import heapq
import math

import numpy as np

_EPS_RADIUS = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def circle_value_grad(c, pts):
    """Coope's circle objective and its (sub)gradient at center ``c``.

    The value is computed in variance form, ``sum((r - mean(r))**2)``, which
    is algebraically identical to ``sum(r**2) - sum(r)**2 / n`` and cannot go
    negative through cancellation.
    """
    diff = np.asarray(c, dtype=float)[None, :] - pts
    r = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
    n = r.shape[0]
    rsum = r.sum()
    value = float(((r - rsum / n) ** 2).sum())
    mask = r >= _EPS_RADIUS
    unit = np.zeros_like(diff)
    unit[mask] = diff[mask] / r[mask, None]
    grad = 2.0 * diff.sum(axis=0) - (2.0 / n) * rsum * unit.sum(axis=0)
    return value, grad


def _value(c, pts):
    diff = c[None, :] - pts
    r = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
    return float(((r - r.mean()) ** 2).sum())


def _golden_step(c, d, pts, hi):
    """Minimize the objective along ``c + g * d`` for ``g`` in ``[0, hi]``."""
    lo = 0.0
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _value(c + x1 * d, pts)
    f2 = _value(c + x2 * d, pts)
    tol = 1e-12 * max(1.0, hi)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _value(c + x1 * d, pts)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _value(c + x2 * d, pts)
    fh = _value(c + hi * d, pts)
    if f1 <= f2 and f1 <= fh:
        return x1, f1
    if f2 <= fh:
        return x2, f2
    return hi, fh


def frank_wolfe(pts, verts, c0, tol, max_iter):
    """Away-step Frank-Wolfe over the polygon spanned by ``verts``.

    ``c0`` must be the vertex barycenter (uniform vertex weights). Forward
    steps first try the open-loop size ``2 / (t + 2)`` and fall back to a
    golden-section line search if that raises the objective; away steps are
    always line-searched. Returns
    ``(center, value, iterations, gap, n_line_searches)``.
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    verts = np.ascontiguousarray(verts, dtype=float)
    nv = verts.shape[0]
    alpha = np.full(nv, 1.0 / nv)
    c = np.array(c0, dtype=float)
    value, grad = circle_value_grad(c, pts)
    n_ls = 0
    t = 0
    while True:
        if not (math.isfinite(value) and np.all(np.isfinite(grad))):
            return c, value, t, math.nan, n_ls
        scores = verts @ grad
        i = int(np.argmin(scores))
        gap = float(grad @ (c - verts[i]))
        if gap <= tol or t >= max_iter:
            return c, value, t, gap, n_ls
        active = np.flatnonzero(alpha > 0.0)
        j = int(active[np.argmax(scores[active])])
        away_gap = float(grad @ (verts[j] - c))
        forward = gap >= away_gap or alpha[j] >= 1.0
        if forward:
            d = verts[i] - c
            gmax = 1.0
        else:
            d = c - verts[j]
            gmax = alpha[j] / (1.0 - alpha[j])
        gamma = None
        if forward:
            trial = min(2.0 / (t + 2.0), gmax)
            trial_value = _value(c + trial * d, pts)
            if trial_value <= value:
                gamma, cand_value = trial, trial_value
        if gamma is None:
            n_ls += 1
            gamma, cand_value = _golden_step(c, d, pts, gmax)
            if cand_value > value:
                return c, value, t, gap, n_ls
        if forward:
            alpha *= 1.0 - gamma
            alpha[i] += gamma
        else:
            alpha *= 1.0 + gamma
            alpha[j] = 0.0 if gamma >= gmax else alpha[j] - gamma
        c = c + gamma * d
        value, grad = circle_value_grad(c, pts)
        t += 1


def dijkstra_all_pairs(w):
    """All-pairs shortest paths by one Dijkstra run per source.

    ``w`` is a dense weight matrix with ``inf`` marking absent edges.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    adj = [[(j, w[i, j]) for j in range(n) if j != i and math.isfinite(w[i, j])] for i in range(n)]
    out = np.full((n, n), math.inf)
    for src in range(n):
        dist = out[src]
        dist[src] = 0.0
        done = [False] * n
        heap = [(0.0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, wt in adj[u]:
                nd = du + wt
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
    return out


def floyd_warshall(w):
    d = np.array(w, dtype=float)
    np.fill_diagonal(d, 0.0)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm falls below
    ``tol * ||a||_F``. Returns ``(eigenvalues, eigenvectors, sweeps)`` with
    eigenvectors as columns, in no particular order.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.sqrt((a * a).sum())
    if scale == 0.0:
        return np.zeros(n), v, 0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off_diag = a - np.diag(np.diag(a))
        off = np.sqrt((off_diag * off_diag).sum())
        if off <= tol * scale:
            return np.diag(a).copy(), v, sweeps - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = cs * colp - sn * colq
                a[:, q] = sn * colp + cs * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = cs * rowp - sn * rowq
                a[q, :] = sn * rowp + cs * rowq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = cs * vp - sn * vq
                v[:, q] = sn * vp + cs * vq
    return np.diag(a).copy(), v, sweeps
