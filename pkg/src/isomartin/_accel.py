"""Numba switch.

Set ``ISOMARTIN_NUMBA=0`` in the environment to run every hot kernel through its
pure-numpy implementation instead of the compiled one.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("ISOMARTIN_NUMBA", "1").strip().lower() not in (
    "0", "false", "no", "off")


def njit(func):
    """Compile `func` with numba when available, otherwise return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False, error_model="numpy")(func)
