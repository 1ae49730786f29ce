import os
import subprocess
import sys

import numpy as np
import pytest
from oracles import arc_points, ring_points

from helicality._backend import available_backends
from helicality.helix import convex_hull

BACKENDS = available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def random_weights(rng, n, p=0.2):
    w = np.full((n, n), np.inf)
    mask = np.triu(rng.uniform(size=(n, n)) < p, 1)
    vals = rng.uniform(0.1, 2.0, size=(n, n))
    w[mask] = vals[mask]
    w = np.minimum(w, w.T)
    return w


@needs_both
def test_circle_value_grad_parity(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(20):
        pts = rng.normal(size=(24, 2))
        c = rng.normal(size=2)
        v1, g1 = py.circle_value_grad(c, pts)
        v2, g2 = cy.circle_value_grad(c, pts)
        assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-14)
        np.testing.assert_allclose(g1, g2, rtol=1e-10, atol=1e-12)


@needs_both
def test_frank_wolfe_parity(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for i in range(10):
        pts = arc_points(rng) if i % 2 else ring_points(rng, noise=0.1)
        hull = convex_hull(pts)
        a = py.frank_wolfe(pts, hull.vertices, hull.barycenter, 1e-9, 10000)
        b = cy.frank_wolfe(pts, hull.vertices, hull.barycenter, 1e-9, 10000)
        assert a[1] == pytest.approx(b[1], abs=1e-9)
        np.testing.assert_allclose(a[0], b[0], atol=1e-4)


@needs_both
def test_shortest_path_parity(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for n in (5, 30, 72):
        w = random_weights(rng, n)
        ref = py.floyd_warshall(w)
        for mod in (py, cy):
            np.testing.assert_allclose(mod.dijkstra_all_pairs(w), ref, rtol=0, atol=1e-12)
            np.testing.assert_allclose(mod.floyd_warshall(w), ref, rtol=0, atol=1e-12)


@needs_both
def test_jacobi_parity(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    a = rng.normal(size=(40, 40))
    a = a + a.T
    w1, v1, _ = py.jacobi_eigh(a)
    w2, v2, _ = cy.jacobi_eigh(a)
    ref = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(np.sort(w1), ref, atol=1e-10)
    np.testing.assert_allclose(np.sort(w2), ref, atol=1e-10)
    for w, v in ((w1, v1), (w2, v2)):
        np.testing.assert_allclose(a @ v, v * w, atol=1e-9)


def test_pure_python_switch():
    env = dict(os.environ, HELICALITY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import helicality; print(helicality.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
