"""Line-of-sight network capacity: spectral norms, bounds and the back-and-forth scheme."""

from ._bfbf import *  # noqa: F401,F403
from ._bfbf import __doc__  # noqa: F401

__version__ = "0.1.0"
