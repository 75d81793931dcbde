"""Kernel backend selection.

The training kernels are written as plain scalar loops so the same source
runs either jit-compiled or as pure Python over numpy arrays. The env flag
GTO_BENCH_NUMBA picks the path at import time; both paths consume uniforms
drawn outside the kernels, so results are bit-identical across backends.
"""
from __future__ import annotations

import os

NUMBA_ENV_FLAG = "GTO_BENCH_NUMBA"
_DISABLED = {"0", "false", "off", "no"}


def _numba_requested() -> bool:
    return os.environ.get(NUMBA_ENV_FLAG, "1").strip().lower() not in _DISABLED


_numba = None
if _numba_requested():
    try:
        import numba as _numba
    except ImportError:
        _numba = None


def jit_if_enabled(func):
    """Compile func when the jit backend is active, else return it as-is."""
    if _numba is not None:
        return _numba.njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numpy" if _numba is None else "numba"
