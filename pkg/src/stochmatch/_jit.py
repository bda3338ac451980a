"""Numba switch for the hot kernels.

Kernels are written once in a numba-compatible subset of Python/numpy.
With numba available (and ``STOCHMATCH_NO_NUMBA`` unset or ``0``) they are
compiled with ``@njit``; otherwise the same functions run as ordinary
Python over numpy arrays.
"""

import os

_DISABLED = os.environ.get("STOCHMATCH_NO_NUMBA", "0") not in ("", "0", "false", "False")

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba

    USE_NUMBA = True
except ImportError:
    _numba = None
    USE_NUMBA = False


def njit(fn):
    if not USE_NUMBA:
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
