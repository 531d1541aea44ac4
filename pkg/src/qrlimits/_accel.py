"""Kernel backend selection.

Hot loops are written twice: a numba ``@njit`` version and a vectorised numpy
version. The numba path is used unless numba is missing or the environment
variable ``QRLIMITS_DISABLE_NUMBA`` is set to a truthy value before import.
"""
import os

_FLAG = "QRLIMITS_DISABLE_NUMBA"

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator without numba."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
