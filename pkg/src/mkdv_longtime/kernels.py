"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy/pure-Python
implementation in ``_kernels_py`` takes over. Set ``MKDV_LONGTIME_PURE=1`` to
force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MKDV_LONGTIME_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "compiled"
else:
    _compiled = None


def available_backends():
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def get_backend(name=None):
    if name is None:
        return _impl
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None


def jost_sweep(u, um, x0, h, z, backend=None):
    return get_backend(backend).jost_sweep(u, um, x0, h, z)


def painleve_march(p0, dp0, s_start, ds, nsteps, rtol, atol, guard, max_substeps=100000, backend=None):
    return get_backend(backend).painleve_march(p0, dp0, s_start, ds, nsteps, rtol, atol, guard, max_substeps)
