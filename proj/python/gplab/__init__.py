"""Gaussian process prior experiments (bindings to the C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, ConfigError, GplabError, PriorSpec  # noqa: F401
