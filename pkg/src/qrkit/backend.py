"""Kernel backend selection: compiled extension with pure-python fallback.

The hot thin-update kernels exist twice: a Cython extension
(``qrkit._kernels``) and a numpy fallback (``qrkit._kernels_py``) with an
identical call surface.  Import-time selection prefers the extension; set
``QRKIT_FORCE_PY=1`` to force the fallback (used by the equivalence tests
and the backend benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("QRKIT_FORCE_PY", "0") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND = "compiled" if getattr(kernels, "IS_COMPILED", False) else "python"


def get_kernels(force_python: bool = False):
    """Return the active kernel module (or the fallback when forced)."""
    return _kernels_py if force_python else kernels
