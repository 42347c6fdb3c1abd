"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; set
``ERDIM_BACKEND=python`` to force the NumPy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _load_compiled() -> ModuleType | None:
    try:
        from . import _core
    except ImportError:
        return None
    return _core


compiled = _load_compiled()
fallback = _fallback

if os.environ.get("ERDIM_BACKEND", "").lower() == "python" or compiled is None:
    kernels: ModuleType = _fallback
else:
    kernels = compiled

BACKEND = kernels.NAME


def available() -> list[ModuleType]:
    """All importable kernel implementations, compiled first."""
    return [m for m in (compiled, fallback) if m is not None]
