"""Monolithic OPO design and analysis toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "1.0.0"
