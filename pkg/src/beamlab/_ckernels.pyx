# cython: language_level=3
"""Compiled versions of the pointwise kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()


cdef inline double _ipow(double b, int k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= b
        b *= b
        k >>= 1
    return r


cdef inline int _half_even(double e):
    # k when e = 2k for a small integer k >= 0, else -1
    cdef double k = e * 0.5
    if k >= 0.0 and k <= 64.0 and k == <int>k:
        return <int>k
    return -1


def power_real(const double[::1] u, double kappa, double omega):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double a, e = kappa - 1.0
    cdef int k = _half_even(e)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if k == 1:
        for i in range(n):
            a = u[i]
            o[i] = omega * a * a * a
    elif k >= 0:
        for i in range(n):
            a = u[i]
            o[i] = omega * _ipow(a * a, k) * a
    else:
        for i in range(n):
            a = u[i]
            o[i] = omega * pow(fabs(a), e) * a
    return out


def power_complex(const double complex[::1] u, double kappa, double omega):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double re, im, m, e = kappa - 1.0
    cdef int k = _half_even(e)
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(n):
        re = u[i].real
        im = u[i].imag
        if k >= 0:
            m = omega * _ipow(re * re + im * im, k)
        else:
            m = omega * pow(sqrt(re * re + im * im), e)
        o[i] = m * u[i]
    return out


def hermite5(const double[::1] nodes, const double[::1] y, const double[::1] dy,
             const double[::1] ddy, const double[::1] q):
    cdef Py_ssize_t i, lo, hi, mid, j, m = nodes.shape[0], nq = q.shape[0]
    cdef double t0, h, hh, s, s2, s3, s4, s5, x
    val = np.empty(nq, dtype=np.float64)
    der = np.empty(nq, dtype=np.float64)
    cdef double[::1] v = val
    cdef double[::1] d = der
    for i in range(nq):
        x = q[i]
        lo = 0
        hi = m - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if nodes[mid] <= x:
                lo = mid
            else:
                hi = mid
        j = lo
        t0 = nodes[j]
        h = nodes[j + 1] - t0
        hh = h * h
        s = (x - t0) / h
        s2 = s * s
        s3 = s2 * s
        s4 = s3 * s
        s5 = s4 * s
        v[i] = (y[j] * (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5)
                + h * dy[j] * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5)
                + hh * ddy[j] * 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5)
                + hh * ddy[j + 1] * 0.5 * (s3 - 2.0 * s4 + s5)
                + h * dy[j + 1] * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5)
                + y[j + 1] * (10.0 * s3 - 15.0 * s4 + 6.0 * s5))
        d[i] = (y[j] * (-30.0 * s2 + 60.0 * s3 - 30.0 * s4)
                + h * dy[j] * (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4)
                + hh * ddy[j] * 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4)
                + hh * ddy[j + 1] * 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4)
                + h * dy[j + 1] * (-12.0 * s2 + 28.0 * s3 - 15.0 * s4)
                + y[j + 1] * (30.0 * s2 - 60.0 * s3 + 30.0 * s4)) / h
    return val, der
