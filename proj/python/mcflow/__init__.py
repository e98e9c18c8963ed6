"""Mean curvature flow of closed surfaces by evolving finite elements."""

from ._mcflow import *  # noqa: F401,F403
from ._mcflow import __doc__  # noqa: F401
