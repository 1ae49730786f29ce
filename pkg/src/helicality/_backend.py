"""Kernel backend selection.

The compiled extension is preferred; set ``HELICALITY_PURE_PYTHON=1`` to force
the NumPy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("HELICALITY_PURE_PYTHON") == "1":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"


def available_backends():
    """Return ``{name: module}`` for every kernel backend importable here."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_c
    except ImportError:
        pass
    else:
        out["cython"] = _kernels_c
    return out
