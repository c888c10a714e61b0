# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: logistic Hessian-vector products and the
semi-stochastic inner iteration.  Mirrors subnewton.kernels.pure."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs

BACKEND = "cython"


cdef inline double _sigmoid_deriv(double m) nogil:
    cdef double e = exp(-fabs(m))
    return e / ((1.0 + e) * (1.0 + e))


def hvp_indexed(const double[:, ::1] X, const double[::1] w, const double[::1] p,
                const long long[::1] idx, double lam):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t t, j, i
    cdef double m, xp, c
    out_arr = np.zeros(d)
    cdef double[::1] out = out_arr
    with nogil:
        for t in range(n):
            i = idx[t]
            m = 0.0
            xp = 0.0
            for j in range(d):
                m += X[i, j] * w[j]
                xp += X[i, j] * p[j]
            c = _sigmoid_deriv(m) * xp
            for j in range(d):
                out[j] += c * X[i, j]
        for j in range(d):
            out[j] = out[j] / n + lam * p[j]
    return out_arr


def sgi_iterate(const double[:, ::1] X, const double[::1] w, const double[::1] g,
                double lam, double alpha, const long long[::1] idx,
                double[::1] p, double limit):
    cdef Py_ssize_t It = idx.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t t, j, i
    cdef double m, xp, c, pnorm_sq
    cdef double limit_sq = limit * limit
    cdef Py_ssize_t diverged_at = 0
    with nogil:
        for t in range(It):
            i = idx[t]
            m = 0.0
            xp = 0.0
            for j in range(d):
                m += X[i, j] * w[j]
                xp += X[i, j] * p[j]
            c = _sigmoid_deriv(m) * xp
            pnorm_sq = 0.0
            for j in range(d):
                p[j] -= alpha * (g[j] + c * X[i, j] + lam * p[j])
                pnorm_sq += p[j] * p[j]
            if pnorm_sq > limit_sq:
                diverged_at = t + 1
                break
    if diverged_at:
        return -diverged_at
    return It
