from ._pslab import *  # noqa: F401,F403
from ._pslab import __version__, run_cli
