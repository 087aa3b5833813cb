"""Non-increasing Markov chains, their absorption times and self-similar limits."""

from ._selfsim import *  # noqa: F401,F403
from ._selfsim import __doc__  # noqa: F401
