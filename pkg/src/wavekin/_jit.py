"""Switch between numba-compiled and pure-Python/numpy code paths.

Set ``WAVEKIN_DISABLE_NUMBA=1`` to run every hot kernel through its
numpy fallback (or as plain Python where no vectorised form exists).
"""

import os
import warnings

_FALSEY = {"", "0", "false", "no", "off"}

try:
    import numba as _numba

    # an old system TBB only costs us a warning; numba falls back to omp/workqueue
    warnings.filterwarnings("ignore", message="The TBB threading layer requires",
                            category=_numba.NumbaWarning)
    NUMBA_INSTALLED = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None
    NUMBA_INSTALLED = False

NUMBA_DISABLED = os.environ.get("WAVEKIN_DISABLE_NUMBA", "").strip().lower() not in _FALSEY
USE_NUMBA = NUMBA_INSTALLED and not NUMBA_DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is active, otherwise the identity decorator."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


# must be numba's own object so the compiler recognises it inside parallel loops
prange = _numba.prange if USE_NUMBA else range


def set_threads(n):
    """Set the numba worker count; returns the value actually applied."""
    if not USE_NUMBA or n is None:
        return 1
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)
    return n


def threads_from_env(default=1):
    raw = os.environ.get("WAVEKIN_THREADS")
    if raw is None or not raw.strip():
        return default
    return max(1, int(raw))
