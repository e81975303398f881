"""Kernel backend selection.

Hot loops are written twice: a ``numba.njit`` version and a vectorised numpy
version.  Set ``ADDER832_BACKEND=numpy`` to force the numpy path (also used
automatically when numba cannot be imported).
"""
from __future__ import annotations

import os

_requested = os.environ.get("ADDER832_BACKEND", "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError("numpy backend requested")
    import numba

    njit = numba.njit(cache=True, nogil=True)
    BACKEND = "numba"
except ImportError:  # pragma: no cover - depends on environment
    numba = None

    def njit(fn):
        return fn

    BACKEND = "numpy"

USE_NUMBA = BACKEND == "numba"
