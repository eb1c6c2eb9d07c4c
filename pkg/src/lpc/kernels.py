"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``LPC_PURE_PYTHON=1`` to
force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"

if not os.environ.get("LPC_PURE_PYTHON"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
    else:
        BACKEND = "cython"
else:
    _impl = _kernels_py

simplex_iterate = _impl.simplex_iterate
knn_predict = _impl.knn_predict


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python"), or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
