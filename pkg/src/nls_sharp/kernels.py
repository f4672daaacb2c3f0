"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``NLS_SHARP_PURE=1`` to force the numpy path.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("NLS_SHARP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

phase_rotate = _impl.phase_rotate
invert_hermite = _impl.invert_hermite


def backend_module(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(name)
