"""Optional numba acceleration.

Hot inner loops in :mod:`gaussflow._kernels` are compiled with numba when it
is importable.  Setting the environment variable ``GAUSSFLOW_NO_NUMBA=1``
forces the pure-numpy fallback path (used by the benchmark to compare both).
"""

import os


def _noop_jit(*args, **kwargs):
    if args and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(func):
        return func

    return wrapper


def _numba_enabled() -> bool:
    if os.environ.get("GAUSSFLOW_NO_NUMBA", "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _numba_enabled()

if USING_NUMBA:
    from numba import njit, prange
else:
    njit = _noop_jit

    def prange(*args):
        return range(*args)
