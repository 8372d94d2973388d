"""Backend selection for the hot kernels.

Set ``PLANARFFT_NUMBA=0`` before import to force the pure-numpy kernels.
The numba kernels are used whenever numba imports cleanly and the flag is
not ``0``.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("PLANARFFT_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(*args, **kwargs):
    """``numba.njit`` with nogil/cache defaults; identity when numba is missing."""
    kwargs.setdefault("nogil", True)
    kwargs.setdefault("cache", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)
