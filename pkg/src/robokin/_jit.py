"""Optional numba acceleration.

Set ``ROBOKIN_DISABLE_NUMBA=1`` to run the pure-numpy code paths. When numba
is missing the numpy paths are used automatically.
"""
import os

_flag = os.environ.get("ROBOKIN_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:
    _numba_njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it untouched."""
    if _numba_njit is None:
        return fn
    return _numba_njit(cache=True, fastmath=False)(fn)


def use_numba(backend=None) -> bool:
    """Resolve a ``backend`` argument: ``"numba"``, ``"numpy"`` or None (default)."""
    if backend is None:
        return USE_NUMBA
    if backend == "numba":
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}; use 'numba' or 'numpy'")
