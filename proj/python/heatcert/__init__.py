"""Heat kernel bounds, volume doubling and Sobolev constants on finite
weighted graphs."""

from heatcert._core import *  # noqa: F401,F403
from heatcert._core import __version__  # noqa: F401
