"""Select the interval kernel implementation at import time.

The compiled extension is used when it was built; setting
``MIXEDFLOW_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

if os.environ.get("MIXEDFLOW_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as kernels

        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
