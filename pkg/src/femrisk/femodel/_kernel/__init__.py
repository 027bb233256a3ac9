"""Kernel dispatch: use the compiled radial-return core when available.

Set FEMRISK_PURE_KERNEL=1 to force the numpy fallback.
"""

import os

from . import _pure

if os.environ.get("FEMRISK_PURE_KERNEL") == "1":
    radial_return_batch = _pure.radial_return_batch
    KERNEL_IMPL = "pure"
else:
    try:
        from ._core import radial_return_batch  # type: ignore[attr-defined]
        KERNEL_IMPL = "cython"
    except ImportError:
        radial_return_batch = _pure.radial_return_batch
        KERNEL_IMPL = "pure"

__all__ = ["radial_return_batch", "KERNEL_IMPL"]
