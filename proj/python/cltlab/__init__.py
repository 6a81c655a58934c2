from ._cltlab import *  # noqa: F401,F403
from ._cltlab import __doc__  # noqa: F401
