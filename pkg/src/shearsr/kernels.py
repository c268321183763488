"""Backend selection for the solver kernels.

The compiled extension is used when it imports; setting ``SHEARSR_PURE=1``
forces the numpy fallback.  ``SHEARSR_THREADS`` caps the worker threads used
by :func:`block_stats`.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled


def default_backend() -> str:
    if os.environ.get("SHEARSR_PURE", "").strip() not in ("", "0"):
        return "python"
    return "compiled" if _compiled is not None else "python"


def get(name: str | None = None):
    name = default_backend() if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def thread_count() -> int:
    raw = os.environ.get("SHEARSR_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError("SHEARSR_THREADS must be a positive integer")
    return n
