"""Squared Pearson correlation between subbands and its pseudo-Euclidean distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroVarianceRow

DEFAULT_RHO_FLOOR = 1e-12


@dataclass
class CorrelationMatrix:
    rho2: np.ndarray


@dataclass
class DistanceMatrix:
    d: np.ndarray
    kind: str = "pseudo"

    def __post_init__(self):
        if self.kind not in ("pseudo", "geodesic"):
            raise ValueError(f"unknown distance kind {self.kind!r}")


def zero_variance_rows(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean(axis=1, keepdims=True)
    return np.flatnonzero(np.all(centered == 0.0, axis=1))


def pearson_squared(x) -> CorrelationMatrix:
    """Squared Pearson correlation between every pair of rows of ``x``.

    ``x`` may be a ``FeatureMatrix`` or a plain ``P x N`` array. Raises
    ``ZeroVarianceRow`` listing the offending rows if any row is constant.
    """
    data = getattr(x, "data", x)
    data = np.asarray(data, dtype=np.float64)
    bad = zero_variance_rows(data)
    if bad.size:
        raise ZeroVarianceRow(bad)
    n = data.shape[1]
    centered = data - data.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / n
    sd = np.sqrt(np.diag(cov))
    rho = cov / np.outer(sd, sd)
    rho2 = np.clip(rho * rho, 0.0, 1.0)
    rho2 = 0.5 * (rho2 + rho2.T)
    np.fill_diagonal(rho2, 1.0)
    return CorrelationMatrix(rho2)


def rho_to_distance(rho2, floor: float = DEFAULT_RHO_FLOOR) -> DistanceMatrix:
    """``sqrt(-0.5 * ln(rho2))`` with ``rho2`` floored to keep distances finite."""
    if not 0.0 < floor < 1.0:
        raise ValueError("floor must lie in (0, 1)")
    r = getattr(rho2, "rho2", rho2)
    r = np.asarray(r, dtype=np.float64)
    d = np.sqrt(-0.5 * np.log(np.maximum(r, floor)))
    # ln(1) is exactly 0, but sqrt(-0.0) is -0.0
    d = np.abs(d)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, "pseudo")


def chroma_consistent_drop(bad_rows, n_rows: int, bins_per_octave: int) -> np.ndarray:
    """Rows to drop so that every chroma of a bad row disappears from all octaves."""
    chromas = {int(r) % bins_per_octave for r in bad_rows}
    rows = np.arange(n_rows)
    return rows[np.isin(rows % bins_per_octave, sorted(chromas))]
