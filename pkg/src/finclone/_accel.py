"""Backend selection for the hot search loops.

Set ``FINCLONE_BACKEND=numpy`` to force the pure-numpy path; the default is
numba when it imports cleanly.
"""
import os

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None

_ENV = "FINCLONE_BACKEND"


def numba_available():
    return _nb is not None


def default_backend():
    choice = os.environ.get(_ENV, "").strip().lower()
    if choice in ("numpy", "python", "off", "0"):
        return "numpy"
    if choice not in ("", "numba", "auto", "1"):
        raise ValueError(f"{_ENV} must be 'numba' or 'numpy', got {choice!r}")
    return "numba" if numba_available() else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if _nb is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _nb.njit(*args, **kwargs)
