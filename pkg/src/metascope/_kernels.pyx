# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled element-sum kernels. Signatures match ``_kernels_py``.

Complex products are written out in real and imaginary parts; C99 complex
multiplication carries NaN/inf recovery branches that block vectorization.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt


cdef bint _uniform(const double[::1] c):
    cdef Py_ssize_t i, n = c.shape[0]
    cdef double step, tol
    if n < 3:
        return True
    step = c[1] - c[0]
    tol = 1e-12 * (abs(c[n - 1] - c[0]) + 1e-300)
    for i in range(2, n):
        if abs(c[i] - c[i - 1] - step) > tol:
            return False
    return True


cdef void _phasors(const double[::1] c, double kw, bint uniform, double[::1] re, double[::1] im) noexcept nogil:
    """re + j im = exp(j kw c); uniform grids rotate by one step instead of calling trig."""
    cdef Py_ssize_t i, n = c.shape[0]
    cdef double sr, si, r, t
    if not uniform:
        for i in range(n):
            re[i] = cos(kw * c[i])
            im[i] = sin(kw * c[i])
        return
    re[0] = cos(kw * c[0])
    im[0] = sin(kw * c[0])
    if n > 1:
        sr = cos(kw * (c[1] - c[0]))
        si = sin(kw * (c[1] - c[0]))
        for i in range(1, n):
            r = re[i - 1]
            t = im[i - 1]
            re[i] = r * sr - t * si
            im[i] = r * si + t * sr


def array_factor(const double complex[:, ::1] amp, const double[::1] x,
                 const double[::1] y, const double[::1] u, const double[::1] v,
                 double k):
    cdef Py_ssize_t M = amp.shape[0]
    cdef Py_ssize_t N = amp.shape[1]
    cdef Py_ssize_t npts = u.shape[0]
    cdef Py_ssize_t p, m, n
    cdef double rr, ri, ar, ai, er, ei
    cdef bint ux = _uniform(x)
    cdef bint uy = _uniform(y)

    a = np.ascontiguousarray(amp)
    cdef double[:, ::1] are = np.ascontiguousarray(a.real)
    cdef double[:, ::1] aim = np.ascontiguousarray(a.imag)
    cdef double[::1] exr = np.empty(M)
    cdef double[::1] exi = np.empty(M)
    cdef double[::1] eyr = np.empty(N)
    cdef double[::1] eyi = np.empty(N)
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] res = out

    with nogil:
        for p in range(npts):
            _phasors(y, k * v[p], uy, eyr, eyi)
            _phasors(x, k * u[p], ux, exr, exi)
            ar = 0.0
            ai = 0.0
            for m in range(M):
                rr = 0.0
                ri = 0.0
                for n in range(N):
                    er = eyr[n]
                    ei = eyi[n]
                    rr = rr + are[m, n] * er - aim[m, n] * ei
                    ri = ri + are[m, n] * ei + aim[m, n] * er
                ar = ar + rr * exr[m] - ri * exi[m]
                ai = ai + rr * exi[m] + ri * exr[m]
            res[p].real = ar
            res[p].imag = ai
    return out


def near_field(const double complex[::1] amp, const double[::1] ex,
               const double[::1] ey, const double[::1] sx, const double[::1] sy,
               double z, double k):
    cdef Py_ssize_t ne = amp.shape[0]
    cdef Py_ssize_t ns = sx.shape[0]
    cdef Py_ssize_t s, e
    cdef double dx, dy, d2, d, w, c, sn, ar, ai, z2 = z * z

    a = np.asarray(amp)
    cdef double[::1] are = np.ascontiguousarray(a.real)
    cdef double[::1] aim = np.ascontiguousarray(a.imag)
    out = np.empty(ns, dtype=np.complex128)
    cdef double complex[::1] res = out

    for s in range(ns):
        ar = 0.0
        ai = 0.0
        for e in range(ne):
            dx = sx[s] - ex[e]
            dy = sy[s] - ey[e]
            d2 = dx * dx + dy * dy + z2
            d = sqrt(d2)
            w = z / d2
            c = cos(k * d) * w
            sn = -sin(k * d) * w
            ar = ar + are[e] * c - aim[e] * sn
            ai = ai + are[e] * sn + aim[e] * c
        res[s] = ar + 1j * ai
    return out
