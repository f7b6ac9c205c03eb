"""Kernel selection: the compiled extension when it imports, else pure Python.

Set ``TRANSLOD_PURE=1`` to force the fallback.
"""

import os

from . import _pure

if os.environ.get("TRANSLOD_PURE"):
    _impl = _pure
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pure

BACKEND = "pure" if _impl is _pure else "compiled"
levenshtein_distance = _impl.levenshtein_distance
haversine_km = _impl.haversine_km
EARTH_RADIUS_KM = _pure.EARTH_RADIUS_KM
