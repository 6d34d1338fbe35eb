"""Optional numba acceleration.

Set ``LAGCHEN_DISABLE_NUMBA=1`` to force the pure-numpy kernels (useful for
debugging and for the benchmark comparison).
"""
import os

DISABLED = os.environ.get("LAGCHEN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it unchanged."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
