"""Kernel backend selection.

The compiled Cython kernels are preferred when importable; the NumPy
module is the fallback and the reference semantics. Override with
PHC_KERNELS=numpy or PHC_KERNELS=compiled (raises if unavailable).
Both backends produce bitwise-identical fields.
"""

import os

from . import kernels_py

_requested = os.environ.get("PHC_KERNELS", "").strip().lower()

if _requested in ("", "compiled", "c", "cython"):
    try:
        from . import _stencil as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested:
            raise ImportError(
                "PHC_KERNELS requested the compiled backend but phcslab.fdtd._stencil "
                "is not built; reinstall with a C compiler available"
            )
        _impl = kernels_py
        BACKEND = "numpy"
elif _requested in ("numpy", "py", "python"):
    _impl = kernels_py
    BACKEND = "numpy"
else:
    raise ImportError(f"unknown PHC_KERNELS value {_requested!r}")

update_e = _impl.update_e
update_h = _impl.update_h
cpml_update_e = _impl.cpml_update_e
cpml_update_h = _impl.cpml_update_h


def get_backend(name=None):
    """Return (module, label) for a named backend; None picks the default."""
    if name in (None, ""):
        return _impl, BACKEND
    name = name.lower()
    if name in ("numpy", "py", "python"):
        return kernels_py, "numpy"
    if name in ("compiled", "c", "cython"):
        from . import _stencil

        return _stencil, "compiled"
    raise ValueError(f"unknown backend {name!r}")
