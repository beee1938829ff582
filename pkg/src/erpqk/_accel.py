"""Optional numba acceleration.

Hot kernels are written twice: a loop version compiled with numba and a
vectorized numpy version. The numba path is used when numba imports and
``ERPQK_NUMBA`` is not set to ``0``. Both paths produce the same results
to rounding.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("ERPQK_NUMBA", "1").lower() not in (
    "0", "false", "no", "off")


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def select(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
