"""Switch between numba-compiled kernels and the plain Python fallback.

The choice is made once at import time from the ``MSP_NUMBA`` environment
variable (``0``/``false``/``off`` disables numba).  Both paths run the very
same kernel source, so results are bit-identical.
"""
import os

_flag = os.environ.get("MSP_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USE_NUMBA = False


def kernel(fn):
    """Compile ``fn`` with numba (nopython, nogil, cached) when enabled."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


BACKEND = "numba" if USE_NUMBA else "python"
