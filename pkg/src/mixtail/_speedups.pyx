# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the sequential model recursions.

These mirror mixtail._fallback exactly; expression order is kept identical
so the two backends agree to the last ulp on finite inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def ar1_recurse(double[::1] eps, double theta, double x0=0.0):
    """X_t = theta * X_{t-1} + eps_t, started at x0, over the whole array."""
    cdef Py_ssize_t n = eps.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double prev = x0
    cdef Py_ssize_t i
    for i in range(n):
        prev = theta * prev + eps[i]
        o[i] = prev
    return out


def garch_recurse(double[::1] eps, double alpha0, double[::1] alpha,
                  double[::1] beta, double sigma2_init):
    """GARCH(p, q) observation recursion.

    sigma2_t = alpha0 + sum_j alpha_j X^2_{t-j} + sum_k beta_k sigma2_{t-k},
    X_t = sqrt(sigma2_t) * eps_t.  Pre-sample X^2 and sigma2 lags all equal
    sigma2_init.  Orders (1,1) and (1,2) take dedicated paths.
    """
    cdef Py_ssize_t n = eps.shape[0]
    cdef Py_ssize_t p = alpha.shape[0]
    cdef Py_ssize_t q = beta.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double s2, x, x2_1, s2_1, s2_2
    cdef double a1, b1, b2
    cdef Py_ssize_t i, j

    if p == 1 and q == 1:
        a1 = alpha[0]
        b1 = beta[0]
        x2_1 = sigma2_init
        s2_1 = sigma2_init
        for i in range(n):
            s2 = alpha0 + a1 * x2_1 + b1 * s2_1
            x = sqrt(s2) * eps[i]
            o[i] = x
            x2_1 = x * x
            s2_1 = s2
        return out

    if p == 1 and q == 2:
        a1 = alpha[0]
        b1 = beta[0]
        b2 = beta[1]
        x2_1 = sigma2_init
        s2_1 = sigma2_init
        s2_2 = sigma2_init
        for i in range(n):
            s2 = alpha0 + a1 * x2_1 + b1 * s2_1 + b2 * s2_2
            x = sqrt(s2) * eps[i]
            o[i] = x
            x2_1 = x * x
            s2_2 = s2_1
            s2_1 = s2
        return out

    # general ring-buffer path
    x2_hist = np.full(p, sigma2_init, dtype=np.float64)
    s2_hist = np.full(q, sigma2_init, dtype=np.float64)
    cdef double[::1] x2h = x2_hist
    cdef double[::1] s2h = s2_hist
    for i in range(n):
        s2 = alpha0
        for j in range(p):
            s2 = s2 + alpha[j] * x2h[j]
        for j in range(q):
            s2 = s2 + beta[j] * s2h[j]
        x = sqrt(s2) * eps[i]
        o[i] = x
        for j in range(p - 1, 0, -1):
            x2h[j] = x2h[j - 1]
        x2h[0] = x * x
        for j in range(q - 1, 0, -1):
            s2h[j] = s2h[j - 1]
        s2h[0] = s2
    return out
