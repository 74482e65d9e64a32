"""Placement hot kernels: compiled extension with pure-Python fallback.

The compiled module is selected at import when available. Set
PACHINQO_PURE_PYTHON=1 to force the fallback (used by the parity tests
and the kernel benchmark).
"""
from __future__ import annotations

import os

if os.environ.get("PACHINQO_PURE_PYTHON"):
    from . import py_fallback as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import py_fallback as _impl

IMPLEMENTATION: str = _impl.IMPLEMENTATION
clear_from = _impl.clear_from
clear_from_except = _impl.clear_from_except

__all__ = ["IMPLEMENTATION", "clear_from", "clear_from_except"]
