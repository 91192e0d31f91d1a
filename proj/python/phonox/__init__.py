"""Transducer modelling toolkit: materials, band structures, envelope cavities and figures of merit."""

import os as _os

_data = _os.path.join(_os.path.dirname(__file__), "data")
if _os.path.isdir(_data):
    _os.environ.setdefault("PHONOX_DATA_DIR", _data)

from ._core import *  # noqa: F401,F403
from ._core import __version__, ValidationError, NumericalError  # noqa: F401
