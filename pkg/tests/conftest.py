import sys

import numpy as np
import pytest

from helicality._backend import available_backends
from helicality.isomap import Embedding


def helix_coords(q=24, j=3, phase=0.0, radius=1.0, slope=1.0, intercept=0.0, winding=1, center=(0.0, 0.0)):
    p = np.arange(1, q * j + 1)
    th = phase + winding * 2 * np.pi * (p - 1) / q
    return np.c_[center[0] + radius * np.cos(th), center[1] + radius * np.sin(th), slope * p + intercept]


def make_embedding(coords, q=24, j=3):
    return Embedding(np.asarray(coords, dtype=float), np.array([3.0, 2.0, 1.0]), q, j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        status, title, elapsed, budget = mod.RESULTS[n]
        limit = "" if budget == float("inf") else f" (budget {budget:g} s)"
        terminalreporter.write_line(f"criterion {n:2d} {status}: {title} [{elapsed:.2f} s{limit}]")
