"""Numba/NumPy backend switch.

Hot kernels are compiled with ``numba.njit`` when numba is importable and the
environment variable ``COLDPLASMA_NUMBA`` is not set to ``0``/``false``/``off``.
Otherwise the identical source runs as plain Python over NumPy arrays, so the
two paths can be benchmarked and cross-checked against each other.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("COLDPLASMA_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in {"0", "false", "no", "off"}

NUMBA_ACTIVE = False
if NUMBA_REQUESTED:
    try:
        import numba as _numba
        NUMBA_ACTIVE = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba = None
else:
    _numba = None

JIT_OPTIONS = {"cache": True, "nogil": True}


def jit(fn):
    """Compile a hot kernel with njit, or return it unchanged in NumPy mode."""
    if NUMBA_ACTIVE:
        try:
            return _numba.njit(**JIT_OPTIONS)(fn)
        except RuntimeError:
            # no cache locator (REPL/stdin definitions); compile uncached
            return _numba.njit(nogil=True)(fn)
    return fn


def jit_dynamic(fn):
    """njit without on-disk caching, for kernels taking function arguments."""
    if NUMBA_ACTIVE:
        return _numba.njit(nogil=True)(fn)
    return fn


def is_compiled(fn) -> bool:
    """True when ``fn`` is a numba dispatcher usable inside jitted code."""
    if not NUMBA_ACTIVE:
        return False
    from numba.core.dispatcher import Dispatcher

    return isinstance(fn, Dispatcher)


def backend_name() -> str:
    return "numba" if NUMBA_ACTIVE else "numpy"
