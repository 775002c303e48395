"""Numerical backend selection.

Hot kernels are compiled with numba unless the environment variable
``NILSPHERE_NUMBA`` is set to ``0``/``false``/``no`` (or numba is not
importable), in which case the same functions run as plain Python over
numpy scalars.  Every kernel has one source; only the decorator changes.
"""

import os

_FLAG = os.environ.get("NILSPHERE_NUMBA", "1").strip().lower()
USE_NUMBA = _FLAG not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:
    def jit(func):
        return _njit(cache=True)(func)

    BACKEND = "numba"
else:
    def jit(func):
        return func

    BACKEND = "numpy"
