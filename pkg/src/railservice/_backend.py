"""Select the quadrature kernel implementation at import time.

The compiled extension is preferred. Set ``RAILSERVICE_PURE_PYTHON=1`` to
force the pure-Python kernels (used by the benchmark and the backend
equivalence tests).
"""

from __future__ import annotations

import os

from . import _purekernels

if os.environ.get("RAILSERVICE_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _purekernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:  # extension not built
        kernels = _purekernels

BACKEND: str = kernels.BACKEND


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def get_kernels(name: str | None = None):
    """Return a kernel module by name (``"cython"``/``"python"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _purekernels
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def set_backend(name: str) -> str:
    """Switch the active kernels (``"cython"`` or ``"python"``); returns the previous name.

    Cached half-line and half-arc integrals are dropped so the next call
    recomputes them with the new kernels.
    """
    global kernels, BACKEND
    previous = BACKEND
    kernels = get_kernels(name)
    BACKEND = kernels.BACKEND
    from . import service

    service.line_half_integral.cache_clear()
    service.arc_half_integral.cache_clear()
    return previous
