"""Backend selection for the element-sum kernels.

The compiled extension is used when it imports; otherwise the numpy versions
run. :func:`use_backend` switches explicitly, e.g. for benchmarks.
"""

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"


def available_backends():
    return tuple(sorted(_BACKENDS))


def backend() -> str:
    return _active


def use_backend(name: str) -> str:
    """Select a backend by name; returns the previously active one."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    prev, _active = _active, name
    return prev


def array_factor(amp, x, y, u, v, k):
    impl = _BACKENDS[_active]
    return impl.array_factor(
        np.ascontiguousarray(amp, dtype=np.complex128),
        np.ascontiguousarray(x, dtype=float),
        np.ascontiguousarray(y, dtype=float),
        np.ascontiguousarray(u, dtype=float),
        np.ascontiguousarray(v, dtype=float),
        float(k),
    )


def near_field(amp, ex, ey, sx, sy, z, k):
    impl = _BACKENDS[_active]
    return impl.near_field(
        np.ascontiguousarray(amp, dtype=np.complex128).ravel(),
        np.ascontiguousarray(ex, dtype=float).ravel(),
        np.ascontiguousarray(ey, dtype=float).ravel(),
        np.ascontiguousarray(sx, dtype=float).ravel(),
        np.ascontiguousarray(sy, dtype=float).ravel(),
        float(z),
        float(k),
    )
