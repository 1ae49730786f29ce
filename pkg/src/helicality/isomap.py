"""k-NN graph, graph geodesics, and classical MDS (the Isomap embedding)."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .correlation import DistanceMatrix
from .errors import DisconnectedGraph, InsufficientPositiveEigenvalues


@dataclass
class NeighborGraph:
    n_vertices: int
    edges: dict  # (u, v) with u < v -> weight

    def weight_matrix(self) -> np.ndarray:
        w = np.full((self.n_vertices, self.n_vertices), np.inf)
        for (u, v), wt in self.edges.items():
            w[u, v] = w[v, u] = wt
        return w

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def components(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = [False] * self.n_vertices
        out = []
        for start in range(self.n_vertices):
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            out.append(sorted(comp))
        return out


@dataclass
class Embedding:
    """MDS coordinates of the ``P`` subbands.

    ``bin_index`` holds the 1-based position of each row inside the octave
    window; it only differs from ``1..P`` once bins have been dropped.
    """

    coords: np.ndarray
    eigenvalues: np.ndarray
    bins_per_octave: int = 24
    n_octaves: int = 3
    bin_index: np.ndarray = field(default=None)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.bin_index is None:
            self.bin_index = np.arange(1, self.coords.shape[0] + 1)
        self.bin_index = np.asarray(self.bin_index, dtype=int)

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]


def knn_graph(d, k: int = 3) -> NeighborGraph:
    """Symmetric-union k-nearest-neighbor graph; ties go to the smaller index."""
    dm = np.asarray(getattr(d, "d", d), dtype=np.float64)
    n = dm.shape[0]
    if not 0 < k < n:
        raise ValueError(f"k must satisfy 0 < k < P (k={k}, P={n})")
    edges = {}
    idx = np.arange(n)
    for u in range(n):
        others = idx[idx != u]
        order = np.lexsort((others, dm[u, others]))
        for v in others[order[:k]]:
            v = int(v)
            key = (u, v) if u < v else (v, u)
            edges[key] = float(dm[u, v])
    return NeighborGraph(n, edges)


def geodesic_distances(g: NeighborGraph, method: str = "dijkstra") -> DistanceMatrix:
    comps = g.components()
    if len(comps) > 1:
        raise DisconnectedGraph(comps)
    w = g.weight_matrix()
    if method == "dijkstra":
        out = kernels.dijkstra_all_pairs(w)
    elif method == "floyd-warshall":
        out = kernels.floyd_warshall(w)
    else:
        raise ValueError(f"unknown shortest-path method {method!r}")
    out = 0.5 * (out + out.T)
    return DistanceMatrix(out, "geodesic")


def double_center(d) -> np.ndarray:
    d2 = np.asarray(d, dtype=np.float64) ** 2
    n = d2.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ d2 @ j
    return 0.5 * (b + b.T)


def classical_mds(d, dims: int = 3, bins_per_octave: int = 24, n_octaves: int = 3, bin_index=None) -> Embedding:
    """Classical (Torgerson) MDS via a cyclic Jacobi eigensolver.

    Each eigenvector is signed so that its largest-magnitude entry is
    positive, which makes the embedding reproducible. Negative eigenvalues
    are discarded; fewer than ``dims`` clearly positive ones is an error.
    """
    dm = np.asarray(getattr(d, "d", d), dtype=np.float64)
    b = double_center(dm)
    w, v, _ = kernels.jacobi_eigh(b)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    top = w[0]
    n_pos = int(np.sum(w > 1e-10 * top)) if top > 0 else 0
    if n_pos < dims:
        raise InsufficientPositiveEigenvalues(
            f"only {n_pos} positive eigenvalue(s), {dims} requested"
        )
    w, v = w[:dims], v[:, :dims].copy()
    for m in range(dims):
        if v[int(np.argmax(np.abs(v[:, m]))), m] < 0:
            v[:, m] = -v[:, m]
    coords = v * np.sqrt(w)[None, :]
    return Embedding(coords, w, bins_per_octave, n_octaves, bin_index)
