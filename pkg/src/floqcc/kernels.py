"""Kernel selection: compiled extension if available, numpy fallback otherwise.

Set FLOQCC_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the cross-check tests).
"""

import os

from . import _logderiv_py

if os.environ.get("FLOQCC_PURE_PYTHON"):
    _impl = _logderiv_py
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _logderiv as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = _logderiv_py
        KERNEL_BACKEND = "python"

logderiv_sector = _impl.logderiv_sector
