"""Backend selection for the numeric kernels.

``BITEXT_LENS_BACKEND=numpy`` forces the pure-numpy path; the default is
numba when it imports, numpy otherwise. The choice is read once at import.
"""
import os

BACKEND_ENV = "BITEXT_LENS_BACKEND"

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func


def _select() -> str:
    requested = os.environ.get(BACKEND_ENV, "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if requested not in ("numba", "numpy"):
        raise ImportError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not NUMBA_AVAILABLE:
        raise ImportError(f"{BACKEND_ENV}=numba but numba is not importable")
    return requested


BACKEND = _select()
USE_NUMBA = BACKEND == "numba"

__all__ = ["BACKEND", "BACKEND_ENV", "NUMBA_AVAILABLE", "USE_NUMBA", "njit"]
