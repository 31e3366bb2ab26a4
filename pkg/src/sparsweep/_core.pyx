# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Bessel J0/Y0/J1/Y1, 9-point stencil apply, row assembly.

Same algorithms and regime boundaries as ``_core_py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, M_PI

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double TWO_OVER_PI = 2.0 / M_PI
cdef double SERIES_MAX = 4.0
cdef double MILLER_MAX = 25.0
cdef int MILLER_START = 100
cdef int SERIES_TERMS = 40
cdef int ASYMPTOTIC_TERMS = 30


cdef void _series(double x, double* out) noexcept nogil:
    cdef double q = 0.25 * x * x
    cdef double j0 = 0.0, j1s = 0.0, y0s = 0.0, y1s = 0.0
    cdef double t0 = 1.0, t1 = 1.0, harm = 0.0
    cdef int k
    for k in range(SERIES_TERMS):
        if k > 0:
            t0 = t0 * (-q) / (k * k)
            t1 = t1 * (-q) / (k * (k + 1.0))
            harm += 1.0 / k
        j0 += t0
        j1s += t1
        y0s -= harm * t0
        y1s += (2.0 * harm + 1.0 / (k + 1.0) - 2.0 * EULER_GAMMA) * t1
    cdef double half = 0.5 * x
    cdef double j1 = half * j1s
    cdef double lg = log(half)
    out[0] = j0
    out[1] = TWO_OVER_PI * ((lg + EULER_GAMMA) * j0 + y0s)
    out[2] = j1
    out[3] = TWO_OVER_PI * lg * j1 - 1.0 / (M_PI * half) - half * y1s / M_PI


cdef void _miller(double x, double* out, double* work) noexcept nogil:
    # work holds MILLER_START + 1 doubles
    cdef int n_top = MILLER_START
    cdef int n, k
    cdef double jp1 = 0.0, jn = 1e-30, jm1, norm, s0 = 0.0, s1 = 0.0, sign, lg
    work[n_top] = jn
    for n in range(n_top, 0, -1):
        jm1 = (2.0 * n / x) * jn - jp1
        jp1 = jn
        jn = jm1
        work[n - 1] = jn
    norm = work[0]
    for k in range(2, n_top + 1, 2):
        norm += 2.0 * work[k]
    for n in range(n_top + 1):
        work[n] /= norm
    for k in range(1, n_top // 2):
        sign = -1.0 if k % 2 else 1.0
        s0 += sign * work[2 * k] / k
        s1 += sign * (work[2 * k - 1] - work[2 * k + 1]) / k
    lg = log(0.5 * x) + EULER_GAMMA
    out[0] = work[0]
    out[1] = TWO_OVER_PI * (lg * work[0] - 2.0 * s0)
    out[2] = work[1]
    out[3] = TWO_OVER_PI * (lg * work[1] - work[0] / x + s1)


cdef void _asymptotic(double x, double nu, double* re, double* im) noexcept nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double tr = 1.0, ti = 0.0, sr = 1.0, si = 0.0, c, tmp
    cdef int k
    for k in range(1, ASYMPTOTIC_TERMS):
        c = (mu - (2 * k - 1) * (2 * k - 1)) / (8.0 * k * x)
        # term *= i * c
        tmp = tr
        tr = -ti * c
        ti = tmp * c
        sr += tr
        si += ti
    cdef double ph = M_PI * (0.5 * nu + 0.25)
    # exp(i x) * exp(-i ph), kept as a product so x itself is not shifted
    cdef double cx = cos(x), sx = sin(x), cp = cos(ph), sp = sin(ph)
    cdef double pr = cx * cp + sx * sp
    cdef double pi_ = sx * cp - cx * sp
    cdef double amp = sqrt(TWO_OVER_PI / x)
    re[0] = amp * (pr * sr - pi_ * si)
    im[0] = amp * (pr * si + pi_ * sr)


def bessel01(x):
    """Return ``(J0, Y0, J1, Y1)`` evaluated at the positive array ``x``."""
    cdef double[:] xf = np.ascontiguousarray(x, dtype=float).ravel()
    cdef Py_ssize_t n = xf.shape[0], k
    res_arr = np.empty((4, n))
    cdef double[:, :] res = res_arr
    cdef double[4] out
    cdef double[:] work = np.empty(MILLER_START + 1)
    cdef double xv, r, i
    with nogil:
        for k in range(n):
            xv = xf[k]
            if xv <= SERIES_MAX:
                _series(xv, out)
            elif xv <= MILLER_MAX:
                _miller(xv, out, &work[0])
            else:
                _asymptotic(xv, 0.0, &r, &i)
                out[0] = r
                out[1] = i
                _asymptotic(xv, 1.0, &r, &i)
                out[2] = r
                out[3] = i
            res[0, k] = out[0]
            res[1, k] = out[1]
            res[2, k] = out[2]
            res[3, k] = out[3]
    shape = np.shape(x)
    return tuple(res_arr[j].reshape(shape) for j in range(4))


def stencil_apply(double complex[:, :, :] vals, double complex[:, :] x):
    """Apply a 9-point operator stored as ``vals[j, i, s]`` to ``x[j, i]``."""
    cdef Py_ssize_t nz = x.shape[0], nx = x.shape[1]
    cdef Py_ssize_t i, j, ii, jj, di, dj, s
    y_arr = np.zeros((nz, nx), dtype=complex)
    cdef double complex[:, :] y = y_arr
    cdef double complex acc
    with nogil:
        for j in range(nz):
            for i in range(nx):
                acc = 0
                s = 0
                for dj in range(-1, 2):
                    jj = j + dj
                    for di in range(-1, 2):
                        ii = i + di
                        if 0 <= jj < nz and 0 <= ii < nx:
                            acc = acc + vals[j, i, s] * x[jj, ii]
                        s += 1
                y[j, i] = acc
    return y_arr


def assemble_rows(cnp.ndarray classes, double complex[:, :] alpha,
                  double complex[:, :] coupling, m, double omega2):
    """Rows ``alpha[c, s] + omega2 * m[neighbour s] * coupling[c, s]``."""
    cdef long[:, :] cls = np.ascontiguousarray(classes, dtype=np.int64)
    cdef double complex[:, :] mm = np.ascontiguousarray(m, dtype=complex)
    cdef Py_ssize_t nz = cls.shape[0], nx = cls.shape[1]
    vals_arr = np.zeros((nz, nx, 9), dtype=complex)
    cdef double complex[:, :, :] vals = vals_arr
    cdef Py_ssize_t i, j, ii, jj, di, dj, s
    cdef long c
    with nogil:
        for j in range(nz):
            for i in range(nx):
                c = cls[j, i]
                s = 0
                for dj in range(-1, 2):
                    jj = j + dj
                    for di in range(-1, 2):
                        ii = i + di
                        if 0 <= jj < nz and 0 <= ii < nx:
                            vals[j, i, s] = alpha[c, s] + omega2 * mm[jj, ii] * coupling[c, s]
                        else:
                            vals[j, i, s] = alpha[c, s]
                        s += 1
    return vals_arr
