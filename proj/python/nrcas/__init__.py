"""Phased-array synthesis with minimum-norm and non-radiating excitations."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
