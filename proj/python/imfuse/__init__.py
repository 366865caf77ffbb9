"""Inter-cell dependency matrices from fused measurement reports and drive tests."""

from ._imfuse import *  # noqa: F401,F403
from ._imfuse import __doc__  # noqa: F401

__version__ = "0.1.0"
