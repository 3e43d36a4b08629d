"""JIT selection.

Kernels in :mod:`bncx.kernels` come in two flavours: a numba ``@njit``
version and a pure-numpy version.  Set ``BNCX_DISABLE_JIT=1`` to force the
numpy path (numba is also skipped automatically when it is not installed).
"""

import os

_FLAG = os.environ.get("BNCX_DISABLE_JIT", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional extra
    _numba = None

HAVE_NUMBA = _numba is not None
USE_JIT = HAVE_NUMBA and _FLAG not in {"1", "true", "yes", "on"}


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, else identity."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)
