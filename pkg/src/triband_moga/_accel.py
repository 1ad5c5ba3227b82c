"""Numba detection and the backend switch.

Set ``TRIBAND_MOGA_NUMBA=0`` before import to force the pure-numpy kernels,
even when numba is installed.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("TRIBAND_MOGA_NUMBA", "1").strip().lower()

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def _wrap(fn):
            return fn

        return _wrap


USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
