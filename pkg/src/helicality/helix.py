"""Helix fitting on a 3-D subband embedding and the helicality score.

Pipeline: chroma centroids -> convex hull -> constrained circle fit
(Frank-Wolfe on Coope's objective) -> linear pitch-height fit -> ideal
helix points -> inverse mean squared residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DegenerateHull, NonFiniteObjective, ShapeMismatch

FW_TOL = 1e-9
FW_MAX_ITER = 10000
INF_MSE = 1e-15


@dataclass
class ChromaCentroids:
    points: np.ndarray
    chroma_labels: np.ndarray

    @property
    def n_chroma(self) -> int:
        return self.points.shape[0]


@dataclass
class ConvexHull2D:
    vertices: np.ndarray
    barycenter: np.ndarray

    def contains(self, point, tol: float = 1e-9) -> bool:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = np.asarray(point)[None, :] - v
        cross = e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0]
        scale = max(1.0, float(np.abs(v).max()))
        return bool(np.all(cross >= -tol * scale * np.hypot(e[:, 0], e[:, 1])))


@dataclass
class CircleFit:
    center: np.ndarray
    radius: float
    objective_value: float
    iterations: int
    duality_gap: float
    initial_center: np.ndarray = field(default=None)
    initial_value: float = math.nan
    line_searches: int = 0


@dataclass
class LineFit:
    slope: float
    intercept: float


@dataclass
class HelixModel:
    circle: CircleFit
    line: LineFit
    phase: float
    winding: int
    bins_per_octave: int

    def angles(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        return self.phase + self.winding * 2.0 * np.pi * (p - 1.0) / self.bins_per_octave

    def point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        th = self.angles(p)
        c, r = self.circle.center, self.circle.radius
        return np.stack(
            [c[0] + r * np.cos(th), c[1] + r * np.sin(th), self.line.slope * p + self.line.intercept],
            axis=-1,
        )


@dataclass
class HelicalityScore:
    h: float
    mse: float
    residuals: np.ndarray


def chroma_of(bin_index, bins_per_octave: int) -> np.ndarray:
    return (np.asarray(bin_index) - 1) % bins_per_octave + 1


def chroma_centroids(emb) -> ChromaCentroids:
    """Mean planar position (first two coordinates) of the bins of each chroma."""
    q = emb.bins_per_octave
    idx = emb.bin_index
    full = np.array_equal(idx, np.arange(1, emb.n_points + 1))
    if full and emb.n_points % q:
        raise ShapeMismatch(f"P={emb.n_points} is not a multiple of Q={q}")
    chroma = chroma_of(idx, q)
    labels = np.unique(chroma)
    pts = np.array([emb.coords[chroma == c, :2].mean(axis=0) for c in labels])
    return ChromaCentroids(pts, labels)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dedup(points, tol=1e-12):
    order = np.lexsort((points[:, 1], points[:, 0]))
    kept = []
    for i in order:
        p = points[i]
        if any(np.max(np.abs(k - p)) <= tol for k in kept):
            continue
        kept.append(p)
    return np.array(kept)


def _chain(a, b, pts, eps):
    """Hull vertices strictly right of a->b, ordered from a to b."""
    if not len(pts):
        return []
    dist = np.array([-_cross(a, b, p) for p in pts])
    far = pts[int(np.argmax(dist))]
    right1 = [p for p in pts if -_cross(a, far, p) > eps]
    right2 = [p for p in pts if -_cross(far, b, p) > eps]
    return _chain(a, far, right1, eps) + [far] + _chain(far, b, right2, eps)


def convex_hull(centroids) -> ConvexHull2D:
    """Quickhull. Vertices are counter-clockwise from the lexicographically smallest.

    Points on the boundary between two vertices are not vertices.
    """
    pts = np.asarray(getattr(centroids, "points", centroids), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or not np.all(np.isfinite(pts)):
        raise DegenerateHull("hull needs finite 2-D points")
    pts = _dedup(pts)
    if len(pts) < 3:
        raise DegenerateHull(f"only {len(pts)} distinct points")
    span = float(np.ptp(pts, axis=0).max())
    eps = 1e-12 * span * span
    a, b = pts[0], pts[-1]
    below = [p for p in pts if -_cross(a, b, p) > eps]
    above = [p for p in pts if _cross(a, b, p) > eps]
    if not below and not above:
        raise DegenerateHull("all points are collinear")
    verts = np.array([a] + _chain(a, b, below, eps) + [b] + _chain(b, a, above, eps))
    return ConvexHull2D(verts, verts.mean(axis=0))


def circle_objective(c, centroids):
    """Value and gradient of ``sum(r**2) - sum(r)**2 / Q`` with ``r`` the distances to ``c``.

    Both algebraic forms of the value are evaluated and must agree.
    """
    pts = np.asarray(getattr(centroids, "points", centroids), dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    value, grad = kernels.circle_value_grad(c, pts)
    if not (math.isfinite(value) and np.all(np.isfinite(grad))):
        raise NonFiniteObjective(f"objective not finite at {c}")
    r = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
    direct = float((r * r).sum() - r.sum() ** 2 / r.size)
    assert value >= 0.0
    assert abs(direct - value) <= 1e-10 * max(1.0, float((r * r).sum()))
    return value, np.asarray(grad)


def frank_wolfe_circle(centroids, hull: ConvexHull2D, tol: float = FW_TOL, max_iter: int = FW_MAX_ITER) -> CircleFit:
    """Circle center constrained to the hull, by conditional gradient.

    Starts at the hull barycenter (uniform weights on the hull vertices).
    Each iteration either steps toward the vertex minimizing the linearized
    objective, first trying ``2 / (t + 2)`` and falling back to a
    golden-section line search if that raises the objective, or steps away
    from the worst vertex still carrying weight. The away steps are what
    keep convergence fast when the optimum sits on the hull boundary.
    Stops when the Frank-Wolfe duality gap drops to ``tol``, after
    ``max_iter`` iterations, or when no step along the chosen direction
    lowers the objective any further (floating-point floor).
    """
    pts = np.asarray(getattr(centroids, "points", centroids), dtype=np.float64)
    c0 = np.asarray(hull.barycenter, dtype=np.float64)
    v0, _ = circle_objective(c0, pts)
    center, value, iters, gap, n_ls = kernels.frank_wolfe(pts, hull.vertices, c0, tol, max_iter)
    if not (math.isfinite(value) and math.isfinite(gap)):
        raise NonFiniteObjective("Frank-Wolfe diverged")
    value, _ = circle_objective(center, pts)
    radius = float(np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]).mean())
    return CircleFit(np.asarray(center), radius, value, int(iters), float(gap), c0, v0, int(n_ls))


def fit_line(emb) -> LineFit:
    """Ordinary least squares of the third coordinate on the bin index."""
    z = np.asarray(emb.coords[:, 2], dtype=np.float64)
    p = np.asarray(emb.bin_index, dtype=np.float64)
    if p.size < 2:
        raise ShapeMismatch("line fit needs at least two bins")
    pm, zm = p.mean(), z.mean()
    a = float(((p - pm) * (z - zm)).sum() / ((p - pm) ** 2).sum())
    return LineFit(a, float(zm - a * pm))


def build_helix(circle: CircleFit, line: LineFit, emb, centroids=None) -> HelixModel:
    """Pick winding direction and phase for a one-turn-per-octave helix.

    For each winding sign the phase is the circular mean of the observed
    angles minus the ideal angular advance; the sign with the lower mean
    squared residual wins (``+1`` on ties).
    """
    q = emb.bins_per_octave
    p = emb.bin_index.astype(np.float64)
    rel = emb.coords[:, :2] - circle.center[None, :]
    phi = np.arctan2(rel[:, 1], rel[:, 0])
    best = None
    for winding in (1, -1):
        advance = winding * 2.0 * np.pi * (p - 1.0) / q
        z = np.exp(1j * (phi - advance)).sum()
        phase = float(np.angle(z)) % (2.0 * np.pi)
        model = HelixModel(circle, line, phase, winding, q)
        mse = float(((emb.coords - model.point(p)) ** 2).sum(axis=1).mean())
        if best is None or mse < best[0]:
            best = (mse, model)
    return best[1]


def project_helix(emb, model: HelixModel) -> np.ndarray:
    return model.point(emb.bin_index)


def helicality(emb, projected) -> HelicalityScore:
    """Inverse mean squared distance between embedding and projected points.

    ``h`` is ``inf`` when the mean squared residual is below ``1e-15``.
    """
    coords = getattr(emb, "coords", emb)
    diff = np.asarray(coords, dtype=np.float64) - np.asarray(projected, dtype=np.float64)
    if diff.shape[0] == 0:
        raise ShapeMismatch("empty embedding")
    res = np.sqrt((diff * diff).sum(axis=1))
    mse = float((res * res).mean())
    h = math.inf if mse < INF_MSE else 1.0 / mse
    return HelicalityScore(h, mse, res)


@dataclass
class HelixFit:
    centroids: ChromaCentroids
    hull: ConvexHull2D
    circle: CircleFit
    line: LineFit
    model: HelixModel
    projected: np.ndarray
    score: HelicalityScore


def fit_helix(emb, tol: float = FW_TOL, max_iter: int = FW_MAX_ITER) -> HelixFit:
    cents = chroma_centroids(emb)
    hull = convex_hull(cents)
    circle = frank_wolfe_circle(cents, hull, tol, max_iter)
    line = fit_line(emb)
    model = build_helix(circle, line, emb, cents)
    proj = project_helix(emb, model)
    return HelixFit(cents, hull, circle, line, model, proj, helicality(emb, proj))
