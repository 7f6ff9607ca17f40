# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit-distance kernel.

Mirrors :func:`kothe_chaos._kernels_py.orbit_distances` exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, INFINITY, isinf

cnp.import_array()


cdef inline double _frac(double s) noexcept nogil:
    if isinf(s):
        return 1.0
    return s / (1.0 + s)


def orbit_distances(const double[::1] absw, const double[:, ::1] weights,
                    const double[::1] coef, const double[::1] coltail,
                    const double[::1] tailfac, double p, double discard,
                    Py_ssize_t n):
    cdef Py_ssize_t J = weights.shape[0]
    cdef Py_ssize_t C = weights.shape[1]
    cdef Py_ssize_t i, m, c
    cdef double s, t, v, acc_lo, acc_hi, inv_p
    cdef bint nonzero
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hi_arr = np.empty(n)
    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    cdef double[::1] acc = np.empty(C)
    inv_p = 1.0 / p if p > 0 else 0.0
    with nogil:
        for i in range(n):
            nonzero = tailfac[i] > 0
            for c in range(C):
                acc[c] = 0.0
            for m in range(J):
                v = absw[i + m]
                if v == 0.0:
                    continue
                nonzero = True
                if p == 0:
                    for c in range(C):
                        t = v * weights[m, c]
                        if t > acc[c]:
                            acc[c] = t
                else:
                    for c in range(C):
                        acc[c] += v * weights[m, c]
            if not nonzero:
                lo[i] = 0.0
                hi[i] = 0.0
                continue
            acc_lo = 0.0
            acc_hi = 0.0
            for c in range(C):
                s = acc[c]
                t = tailfac[i] * coltail[c] if tailfac[i] > 0 else 0.0
                if p == 0:
                    acc_lo += coef[c] * _frac(s)
                    acc_hi += coef[c] * _frac(t if t > s else s)
                elif p == 1.0:
                    acc_lo += coef[c] * _frac(s)
                    acc_hi += coef[c] * _frac(s + t)
                else:
                    acc_lo += coef[c] * _frac(pow(s, inv_p))
                    acc_hi += coef[c] * _frac(pow(s + t, inv_p))
            lo[i] = acc_lo
            hi[i] = acc_hi + discard
    return lo_arr, hi_arr
