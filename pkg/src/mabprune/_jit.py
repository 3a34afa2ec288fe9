"""Backend selection for the numeric kernels.

Kernels are plain Python over numpy arrays.  By default they are compiled
with ``numba.njit``; setting ``MABPRUNE_DISABLE_JIT=1`` (or running without
numba installed) executes the very same functions interpreted.
"""
import os

_FLAG = os.environ.get("MABPRUNE_DISABLE_JIT", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError
    import numba

    BACKEND = "numba"
except ImportError:
    numba = None
    BACKEND = "python"


def njit(func=None, *, inline=False):
    """``numba.njit`` or identity.  ``inline=True`` inlines at numba-IR level.

    No on-disk cache: cached recursive kernels crash on reload (numba 0.66).
    """
    def wrap(f):
        if numba is None:
            return f
        if inline:
            return numba.njit(inline="always")(f)
        return numba.njit(f)

    return wrap if func is None else wrap(func)
