"""Hierarchical relatively coherent sets from Ulam transfer matrices."""

from ._core import *  # noqa: F401,F403
from ._core import RelcohError

__all__ = [name for name in dir() if not name.startswith("_")]
