"""Octave-equivalence scoring of audio corpora by helix fitting on an Isomap embedding."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
