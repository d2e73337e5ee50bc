"""Kernel selection at import: compiled extension if importable, else pure Python.

Set ``JAMLIM_PURE=1`` to force the Python kernels.
"""
import os

from . import _pykernels

try:
    if os.environ.get("JAMLIM_PURE"):
        raise ImportError("JAMLIM_PURE set")
    from . import _ckernels
except ImportError:
    _ckernels = None

kernels = _ckernels if _ckernels is not None else _pykernels
BACKEND = kernels.NAME


def available() -> dict:
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


def call(name: str, *args, impl=None):
    """Run kernel ``name``; retry on the Python path if the compiled one cannot represent the input."""
    mod = impl if impl is not None else kernels
    try:
        return getattr(mod, name)(*args)
    except OverflowError:
        if mod is _pykernels:
            raise
        return getattr(_pykernels, name)(*args)
