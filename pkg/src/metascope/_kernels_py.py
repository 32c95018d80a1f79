"""numpy implementations of the element-sum kernels."""

import numpy as np

_CHUNK = 8192


def array_factor(amp, x, y, u, v, k):
    """``sum_mn amp[m, n] * exp(1j*k*(x[m]*u + y[n]*v))`` at each (u, v) pair.

    The phase is separable in x and y, so each chunk costs two small exponent
    tables and one matrix product.
    """
    out = np.empty(u.shape[0], dtype=np.complex128)
    for s in range(0, u.shape[0], _CHUNK):
        uc = u[s : s + _CHUNK]
        vc = v[s : s + _CHUNK]
        ex = np.exp(1j * k * np.outer(uc, x))
        ey = np.exp(1j * k * np.outer(vc, y))
        out[s : s + _CHUNK] = np.sum((ex @ amp) * ey, axis=1)
    return out


def near_field(amp, ex, ey, sx, sy, z, k):
    """Spherical-wave sum with a ``z/d`` obliquity factor at each plane sample."""
    out = np.empty(sx.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK * 16 // max(1, amp.shape[0]))
    for s in range(0, sx.shape[0], step):
        dx = sx[s : s + step, None] - ex[None, :]
        dy = sy[s : s + step, None] - ey[None, :]
        d = np.sqrt(dx * dx + dy * dy + z * z)
        out[s : s + step] = (np.exp(-1j * k * d) * (z / (d * d))) @ amp
    return out
