"""Select the subset-scan kernel: compiled when available, else pure Python.

Set ``WALLX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _scan_py

BACKEND = "python"
connected_betas = _scan_py.connected_betas

if os.environ.get("WALLX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        connected_betas = _kernels.connected_betas
        BACKEND = "compiled"

__all__ = ["connected_betas", "BACKEND"]
