"""Numba/numpy backend selection.

All numeric kernels in :mod:`closedchain._kernels` are written as plain
Python over float64 scalars and small arrays, so the same source runs either
compiled (numba ``@njit``) or interpreted (pure numpy). The compiled path is
the default whenever numba imports cleanly; set ``CLOSEDCHAIN_NUMBA=0`` to
force the interpreted fallback. The choice is made once at import time.
"""
from __future__ import annotations

import os

_FALSY = {"0", "false", "off", "no"}


def _resolve_enabled() -> bool:
    flag = os.environ.get("CLOSEDCHAIN_NUMBA", "1").strip().lower()
    if flag in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _resolve_enabled()

if NUMBA_ENABLED:
    from numba import njit
else:

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def unjitted(func):
    """Return the interpreted implementation behind a possibly-jitted kernel."""
    return getattr(func, "py_func", func)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
