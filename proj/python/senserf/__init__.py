"""Energy-detection spectrum sensing under RF front-end impairments."""
from ._senserf import *  # noqa: F401,F403
from ._senserf import Error  # noqa: F401
