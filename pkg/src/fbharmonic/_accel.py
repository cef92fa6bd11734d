"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``FBHARMONIC_NUMBA=0`` in the environment to force the numpy path.
The flag is read once at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_flag = os.environ.get("FBHARMONIC_NUMBA", "1").strip().lower()
USE_NUMBA = numba is not None and _flag not in ("0", "false", "no", "off")


def njit(f=None, **options):
    """``numba.njit`` when numba is present, identity otherwise."""
    options.setdefault("cache", True)
    if numba is None:
        return f if f is not None else (lambda g: g)
    if f is None:
        return lambda g: numba.njit(g, **options)
    return numba.njit(f, **options)
