"""Optional numba acceleration.

Set ``ANNULAB_DISABLE_NUMBA=1`` to force the pure-numpy/python code paths
(useful for debugging and for the kernel benchmark).
"""
import os

_DISABLED = os.environ.get("ANNULAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by ANNULAB_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def njit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if HAS_NUMBA:
        return numba.njit(cache=True)(func)
    return func
