"""Numba shim.

Set ``DEPTHNORMAL_DISABLE_NUMBA=1`` to route every hot kernel through its
pure-numpy implementation. If numba cannot be imported the numpy path is
used automatically.
"""
import os
import warnings

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
DISABLED = os.environ.get("DEPTHNORMAL_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

if not HAVE_NUMBA and not DISABLED:  # pragma: no cover
    warnings.warn("numba is not installed - falling back to numpy kernels")

BACKENDS = ("numba", "numpy")


def default_backend():
    return "numba" if HAVE_NUMBA and not DISABLED else "numpy"


def resolve_backend(backend=None):
    if backend is None:
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, otherwise a passthrough."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
