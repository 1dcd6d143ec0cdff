"""Kernel backend selection.

The compiled Cython backend is preferred when it was built; otherwise the
NumPy fallback is used. Set STYLEOPT_KERNELS=py (or =c) to force a backend;
``c`` raises if the extension is unavailable.
"""

import os

from . import _pykernels

_requested = os.environ.get("STYLEOPT_KERNELS", "auto").lower()
if _requested not in ("auto", "c", "py"):
    raise ValueError(f"STYLEOPT_KERNELS must be auto, c or py, got {_requested!r}")

_impl = None
if _requested in ("auto", "c"):
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _requested == "c":
            raise
if _impl is None:
    _impl = _pykernels

BACKEND = _impl.NAME

wrap_angle = _impl.wrap_angle
fk_batch = _impl.fk_batch
ssd_batch = _impl.ssd_batch
feature_batch = _impl.feature_batch
mlp_inputs_batch = _impl.mlp_inputs_batch
mlp_cost_batch = _impl.mlp_cost_batch

__all__ = [
    "BACKEND",
    "wrap_angle",
    "fk_batch",
    "ssd_batch",
    "feature_batch",
    "mlp_inputs_batch",
    "mlp_cost_batch",
]
