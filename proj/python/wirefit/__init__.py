"""Recover a buried current segment's position, depth, length and current
from a Bz magnetic field image."""

from ._wirefit import *  # noqa: F401,F403
from ._wirefit import __doc__  # noqa: F401
