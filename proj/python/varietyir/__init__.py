"""Variety-robust retrieval: transducers, BM25, subword encoders, metrics."""

from ._core import *  # noqa: F401,F403
from ._core import VarietyIRError, __version__

__all__ = [name for name in dir() if not name.startswith("_")]
