import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helicality.correlation import (
    chroma_consistent_drop,
    pearson_squared,
    rho_to_distance,
)
from helicality.errors import ZeroVarianceRow


def textbook_rho2(x):
    """Single-pass sums formula, one pair at a time."""
    p, n = x.shape
    out = np.empty((p, p))
    for a in range(p):
        for b in range(p):
            sx = sy = sxx = syy = sxy = 0.0
            for u, v in zip(x[a], x[b]):
                sx += u
                sy += v
                sxx += u * u
                syy += v * v
                sxy += u * v
            num = n * sxy - sx * sy
            den = math.sqrt(n * sxx - sx * sx) * math.sqrt(n * syy - sy * sy)
            out[a, b] = (num / den) ** 2
    return out


def test_affine_dependence_gives_one():
    x = np.array([[1.0, 4.0, 2.0, 7.0], [0.0, 0.0, 0.0, 0.0]])
    x[1] = 2 * x[0] + 3
    assert pearson_squared(x).rho2[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_orthogonal_rows_give_zero():
    x = np.array([[1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0]])
    assert pearson_squared(x).rho2[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_matches_textbook_oracle(rng):
    x = rng.normal(size=(5, 50))
    np.testing.assert_allclose(pearson_squared(x).rho2, textbook_rho2(x), atol=1e-12)


def test_type_invariants(rng):
    r = pearson_squared(rng.uniform(size=(12, 30))).rho2
    assert np.array_equal(r, r.T)
    assert np.all(np.diag(r) == 1.0)
    assert r.min() >= 0.0 and r.max() <= 1.0


def test_zero_variance_row_reported():
    x = np.array([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0], [0.0, 1.0, 0.0], [2.0, 2.0, 2.0]])
    with pytest.raises(ZeroVarianceRow) as err:
        pearson_squared(x)
    assert err.value.rows == [1, 3]


def test_chroma_consistent_drop_removes_whole_chroma():
    assert chroma_consistent_drop([5], 12, 4).tolist() == [1, 5, 9]


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (4, 20), elements=st.floats(-100, 100)),
    st.lists(st.floats(0.1, 10), min_size=4, max_size=4),
    st.lists(st.floats(-50, 50), min_size=4, max_size=4),
    st.lists(st.booleans(), min_size=4, max_size=4),
)
def test_invariant_under_rowwise_affine_maps(x, scale, shift, flip):
    x = x + np.linspace(0, 1, 20)[None, :] * np.arange(1, 5)[:, None]
    if np.any(x.std(axis=1) < 1e-3):
        return
    s = np.array(scale) * np.where(flip, -1.0, 1.0)
    y = x * s[:, None] + np.array(shift)[:, None]
    np.testing.assert_allclose(pearson_squared(x).rho2, pearson_squared(y).rho2, atol=1e-10)


@pytest.mark.parametrize(
    "rho2, d", [(1.0, 0.0), (math.exp(-2.0), 1.0), (math.exp(-0.5), 0.5)]
)
def test_analytic_table(rho2, d):
    m = np.array([[1.0, rho2], [rho2, 1.0]])
    assert abs(rho_to_distance(m).d[0, 1] - d) <= 1e-15


def test_floor_keeps_distance_finite():
    d = rho_to_distance(np.array([[1.0, 0.0], [0.0, 1.0]])).d
    assert d[0, 1] == pytest.approx(math.sqrt(-0.5 * math.log(1e-12)))
    assert d[0, 1] == pytest.approx(3.717, abs=1e-3)


def test_round_trip_and_monotone(rng):
    r = np.sort(rng.uniform(1e-10, 1.0, 200))
    m = np.diag(np.ones(200))
    m[0, :] = r
    d = rho_to_distance(m).d[0, 1:]
    np.testing.assert_allclose(np.exp(-2 * d**2), r[1:], rtol=1e-12, atol=0)
    assert np.all(np.diff(d) < 0)


def test_distance_type_invariants(rng):
    r = pearson_squared(rng.normal(size=(10, 15)))
    d = rho_to_distance(r).d
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0.0)
    assert np.all(np.isfinite(d)) and d.min() >= 0.0
