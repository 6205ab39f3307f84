"""Numba switch.

Set ``MULTICHEB_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels. Numba is also skipped silently when it is not installed.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("MULTICHEB_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
