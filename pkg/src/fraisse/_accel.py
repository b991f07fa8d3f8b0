"""Numba switch.

Set ``FRAISSE_DISABLE_NUMBA=1`` to force the pure-numpy kernels.  Numba is
also skipped silently when it is not importable.
"""

import os

DISABLED = os.environ.get("FRAISSE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


def njit(func):
    """``numba.njit(cache=True)`` when numba is usable, else ``None``."""
    if numba is None:
        return None
    return numba.njit(cache=True)(func)
