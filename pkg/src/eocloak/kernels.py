"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``EOCLOAK_PURE_PYTHON=1`` is set, the numpy implementation is used.
``BACKEND`` names the active one.
"""
import os

from . import _pykernels

if os.environ.get("EOCLOAK_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _wrap(fn):
    import numpy as np

    def call(*args, **kwargs):
        args = [np.ascontiguousarray(a, dtype=float) if hasattr(a, "shape") else a
                for a in args]
        return fn(*args, **kwargs)

    call.__name__ = fn.__name__
    call.__doc__ = fn.__doc__
    return call


log_remainder = _wrap(_impl.log_remainder)
normal_derivative = _wrap(_impl.normal_derivative)
np_adjoint = _wrap(_impl.np_adjoint)
potential_matrices = _wrap(_impl.potential_matrices)
potential_apply = _wrap(_impl.potential_apply)


def backend_module(name: str):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
