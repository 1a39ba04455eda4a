"""Stochastic leverage map workbench."""

from levdyn._core import *  # noqa: F401,F403
from levdyn._core import __version__

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
