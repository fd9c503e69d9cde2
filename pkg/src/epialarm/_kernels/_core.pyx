# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain-binomial kernels; API and formulas mirror ``_pure``."""

from libc.math cimport INFINITY,exp, expm1, lgamma, log

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPL = "compiled"


def sir_path(long long s0, long long i0, long long r0,
             cnp.int64_t[::1] istar, cnp.int64_t[::1] rstar):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef cnp.ndarray s_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.ndarray i_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.ndarray r_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] s = s_arr
    cdef cnp.int64_t[::1] i = i_arr
    cdef cnp.int64_t[::1] r = r_arr
    cdef Py_ssize_t t
    cdef int bad_day = -1
    cdef str bad_comp = ""
    s[0] = s0
    i[0] = i0
    r[0] = r0
    for t in range(tau):
        s[t + 1] = s[t] - istar[t]
        i[t + 1] = i[t] + istar[t] - rstar[t]
        r[t + 1] = r[t] + rstar[t]
        if bad_day < 0:
            if s[t + 1] < 0:
                bad_day = t + 1
                bad_comp = "s"
            elif i[t + 1] < 0:
                bad_day = t + 1
                bad_comp = "i"
    return s_arr, i_arr, r_arr, bad_day, bad_comp


def seir_path(long long s0, long long e0, long long i0, long long r0,
              cnp.int64_t[::1] estar, cnp.int64_t[::1] istar,
              cnp.int64_t[::1] rstar):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef cnp.ndarray s_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.ndarray e_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.ndarray i_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.ndarray r_arr = np.empty(tau + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] s = s_arr
    cdef cnp.int64_t[::1] e = e_arr
    cdef cnp.int64_t[::1] i = i_arr
    cdef cnp.int64_t[::1] r = r_arr
    cdef Py_ssize_t t
    cdef int bad_day = -1
    cdef str bad_comp = ""
    s[0] = s0
    e[0] = e0
    i[0] = i0
    r[0] = r0
    for t in range(tau):
        s[t + 1] = s[t] - estar[t]
        e[t + 1] = e[t] + estar[t] - istar[t]
        i[t + 1] = i[t] + istar[t] - rstar[t]
        r[t + 1] = r[t] + rstar[t]
        if bad_day < 0:
            if s[t + 1] < 0:
                bad_day = t + 1
                bad_comp = "s"
            elif e[t + 1] < 0:
                bad_day = t + 1
                bad_comp = "e"
            elif i[t + 1] < 0:
                bad_day = t + 1
                bad_comp = "i"
    return s_arr, e_arr, i_arr, r_arr, bad_day, bad_comp


cdef inline double _logpmf_rate(double pool, double k, double rate) noexcept nogil:
    # log Binomial(pool, 1 - exp(-rate)) pmf at k; -inf when impossible.
    cdef double out, p
    if k < 0 or k > pool or rate < 0:
        return -INFINITY
    out = lgamma(pool + 1.0) - lgamma(k + 1.0) - lgamma(pool - k + 1.0) - (pool - k) * rate
    if k > 0:
        p = -expm1(-rate)
        if p <= 0:
            return -INFINITY
        out += k * log(p)
    return out


def sir_loglik(cnp.int64_t[::1] s, cnp.int64_t[::1] i,
               cnp.int64_t[::1] istar, cnp.int64_t[::1] rstar,
               cnp.float64_t[::1] beta_t, double gamma, double n):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef Py_ssize_t t
    cdef double total = 0.0
    cdef double pool_i
    for t in range(tau):
        pool_i = <double> i[t]
        total += _logpmf_rate(<double> s[t], <double> istar[t], beta_t[t] * (pool_i / n))
        total += _logpmf_rate(pool_i, <double> rstar[t], gamma)
        if total == -INFINITY:
            return -INFINITY
    return total


def sir_loglik_pointwise(cnp.int64_t[::1] s, cnp.int64_t[::1] i,
                         cnp.int64_t[::1] istar, cnp.int64_t[::1] rstar,
                         cnp.float64_t[::1] beta_t, double gamma, double n):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef cnp.ndarray out_arr = np.empty(tau, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t t
    cdef double pool_i
    for t in range(tau):
        pool_i = <double> i[t]
        out[t] = _logpmf_rate(<double> s[t], <double> istar[t], beta_t[t] * (pool_i / n)) \
            + _logpmf_rate(pool_i, <double> rstar[t], gamma)
    return out_arr


def seir_loglik(cnp.int64_t[::1] s, cnp.int64_t[::1] e, cnp.int64_t[::1] i,
                cnp.int64_t[::1] estar, cnp.int64_t[::1] istar,
                cnp.int64_t[::1] rstar, cnp.float64_t[::1] beta_t,
                double lam, double gamma, double n):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef Py_ssize_t t
    cdef double total = 0.0
    cdef double pool_i
    for t in range(tau):
        pool_i = <double> i[t]
        total += _logpmf_rate(<double> s[t], <double> estar[t], beta_t[t] * (pool_i / n))
        total += _logpmf_rate(<double> e[t], <double> istar[t], lam)
        total += _logpmf_rate(pool_i, <double> rstar[t], gamma)
        if total == -INFINITY:
            return -INFINITY
    return total


def seir_loglik_pointwise(cnp.int64_t[::1] s, cnp.int64_t[::1] e, cnp.int64_t[::1] i,
                          cnp.int64_t[::1] estar, cnp.int64_t[::1] istar,
                          cnp.int64_t[::1] rstar, cnp.float64_t[::1] beta_t,
                          double lam, double gamma, double n):
    cdef Py_ssize_t tau = istar.shape[0]
    cdef cnp.ndarray out_arr = np.empty(tau, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t t
    cdef double pool_i
    for t in range(tau):
        pool_i = <double> i[t]
        out[t] = _logpmf_rate(<double> s[t], <double> estar[t], beta_t[t] * (pool_i / n)) \
            + _logpmf_rate(<double> e[t], <double> istar[t], lam) \
            + _logpmf_rate(pool_i, <double> rstar[t], gamma)
    return out_arr
