"""Vapour-cell memory simulation and analysis toolkit."""

import os as _os
from pathlib import Path as _Path

# Prefer the data file packaged alongside the module; the compiled-in
# default and the VAPORSIM_DATA variable still win when already set.
_packaged = _Path(__file__).resolve().parent / "data" / "cesium.cfg"
if "VAPORSIM_DATA" not in _os.environ and _packaged.exists():
    _os.environ["VAPORSIM_DATA"] = str(_packaged)

from vaporsim._core import *  # noqa: F401,F403
from vaporsim._core import __doc__  # noqa: F401

__version__ = "0.1.0"
