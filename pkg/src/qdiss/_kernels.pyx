# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, erf, sqrt, hypot, fabs, fmin, fmax

cnp.import_array()

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double cabs(cplx)
    cplx conj(cplx)


cdef inline void _su2(double nx, double ny, double nz, double angle,
                      cplx* a, cplx* b) nogil:
    cdef double c = cos(0.5 * angle)
    cdef double s = sin(0.5 * angle)
    a[0] = c - 1j * (s * nz)
    b[0] = -s * ny - 1j * (s * nx)


cdef inline void _su2_mul(cplx a1, cplx b1, cplx* a2, cplx* b2) nogil:
    cdef cplx a = a1 * a2[0] - b1 * conj(b2[0])
    cdef cplx b = a1 * b2[0] + b1 * conj(a2[0])
    a2[0] = a
    b2[0] = b


def eigh2(double a, double d, cplx b):
    cdef double half_sum = 0.5 * (a + d)
    cdef double half_diff = 0.5 * (a - d)
    cdef double babs = cabs(b)
    cdef double r = hypot(half_diff, babs)
    cdef double lams[2]
    cdef cplx out[4]
    cdef cplx c10, c11, c20, c21
    cdef double n1, n2, sign
    cdef int k
    lams[0] = half_sum - r
    lams[1] = half_sum + r
    if babs == 0.0:
        if a <= d:
            return a, d, 1.0 + 0j, 0j, 0j, 1.0 + 0j
        return d, a, 0j, 1.0 + 0j, 1.0 + 0j, 0j
    for k in range(2):
        sign = -1.0 if k == 0 else 1.0
        c10 = b
        c11 = -half_diff + sign * r
        c20 = half_diff + sign * r
        c21 = conj(b)
        n1 = hypot(cabs(c10), cabs(c11))
        n2 = hypot(cabs(c20), cabs(c21))
        if n1 >= n2:
            out[2 * k] = c10 / n1
            out[2 * k + 1] = c11 / n1
        else:
            out[2 * k] = c20 / n2
            out[2 * k + 1] = c21 / n2
    return lams[0], lams[1], out[0], out[1], out[2], out[3]


def compose_rotations(axes, angles):
    cdef double[:, ::1] ax = np.ascontiguousarray(axes, dtype=np.float64).reshape(-1, 3)
    cdef double[::1] th = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0]
    cdef cnp.ndarray[cplx, ndim=3] out = np.empty((n + 1, 2, 2), dtype=np.complex128)
    cdef cplx a = 1.0, b = 0.0, ra, rb
    cdef Py_ssize_t m
    out[0, 0, 0] = a
    out[0, 0, 1] = b
    out[0, 1, 0] = -conj(b)
    out[0, 1, 1] = conj(a)
    for m in range(n):
        _su2(ax[m, 0], ax[m, 1], ax[m, 2], th[m], &ra, &rb)
        _su2_mul(ra, rb, &a, &b)
        out[m + 1, 0, 0] = a
        out[m + 1, 0, 1] = b
        out[m + 1, 1, 0] = -conj(b)
        out[m + 1, 1, 1] = conj(a)
    return out


cdef inline double _cdf(double t, double lo, double hi, double center, double scale) nogil:
    t = fmin(fmax(t, lo), hi)
    return erf((t - center) * scale)


def gaussian_step_propagator(double nx, double ny, double nz, double angle,
                             double sigma_fraction, double truncation,
                             int n_slices):
    cdef double center = 0.5
    cdef double sigma = sigma_fraction
    cdef double lo = fmax(0.0, center - truncation * sigma)
    cdef double hi = fmin(1.0, center + truncation * sigma)
    cdef double scale = 1.0 / (sigma * sqrt(2.0))
    cdef double total = _cdf(hi, lo, hi, center, scale) - _cdf(lo, lo, hi, center, scale)
    cdef double prev = _cdf(0.0, lo, hi, center, scale)
    cdef double cur, theta
    cdef cplx a = 1.0, b = 0.0, ra, rb
    cdef int k
    with nogil:
        for k in range(n_slices):
            cur = _cdf((k + 1) / <double>n_slices, lo, hi, center, scale)
            theta = angle * (cur - prev) / total
            prev = cur
            if theta == 0.0:
                continue
            _su2(nx, ny, nz, theta, &ra, &rb)
            _su2_mul(ra, rb, &a, &b)
    return np.array([[a, b], [-conj(b), conj(a)]], dtype=np.complex128)
