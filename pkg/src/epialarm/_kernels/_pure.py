"""NumPy implementations of the chain-binomial hot kernels.

This module mirrors the compiled extension ``epialarm._kernels._core``;
``epialarm._kernels`` picks one of the two at import time. Keep the two
implementations formula-identical: only floating-point summation order may
differ.

Conventions shared by both implementations:

* transition arrays are int64 of length tau, path arrays int64 of length
  tau + 1 with index 0 holding the initial conditions;
* day-t transition probabilities use exponential rates, i.e.
  ``p = 1 - exp(-rate)`` so ``log p = log(-expm1(-rate))`` and
  ``log(1 - p) = -rate``;
* impossible binomial draws (k < 0, k > pool, zero-probability event with
  k > 0) yield -inf, never an exception.
"""

import numpy as np
from scipy.special import gammaln

IMPL = "pure"


def sir_path(s0, i0, r0, istar, rstar):
    """Compartment paths induced by the SIR difference equations.

    Returns ``(s, i, r, bad_day, bad_comp)`` where the paths have length
    tau + 1. ``bad_day`` is the first 1-based day on which a compartment
    would go negative (-1 when the path is valid) and ``bad_comp`` is the
    offending compartment name ('' when valid).
    """
    tau = istar.shape[0]
    ci = np.cumsum(istar)
    cr = np.cumsum(rstar)
    s = np.empty(tau + 1, dtype=np.int64)
    i = np.empty(tau + 1, dtype=np.int64)
    r = np.empty(tau + 1, dtype=np.int64)
    s[0], i[0], r[0] = s0, i0, r0
    s[1:] = s0 - ci
    i[1:] = i0 + ci - cr
    r[1:] = r0 + cr
    neg_s = s < 0
    neg_i = i < 0
    bad = neg_s | neg_i
    if bad.any():
        day = int(np.argmax(bad))
        comp = "s" if neg_s[day] else "i"
        return s, i, r, day, comp
    return s, i, r, -1, ""


def seir_path(s0, e0, i0, r0, estar, istar, rstar):
    """SEIR analogue of :func:`sir_path`."""
    tau = istar.shape[0]
    ce = np.cumsum(estar)
    ci = np.cumsum(istar)
    cr = np.cumsum(rstar)
    s = np.empty(tau + 1, dtype=np.int64)
    e = np.empty(tau + 1, dtype=np.int64)
    i = np.empty(tau + 1, dtype=np.int64)
    r = np.empty(tau + 1, dtype=np.int64)
    s[0], e[0], i[0], r[0] = s0, e0, i0, r0
    s[1:] = s0 - ce
    e[1:] = e0 + ce - ci
    i[1:] = i0 + ci - cr
    r[1:] = r0 + cr
    neg_s = s < 0
    neg_e = e < 0
    neg_i = i < 0
    bad = neg_s | neg_e | neg_i
    if bad.any():
        day = int(np.argmax(bad))
        comp = "s" if neg_s[day] else ("e" if neg_e[day] else "i")
        return s, e, i, r, day, comp
    return s, e, i, r, -1, ""


def _logpmf_rate(pool, k, rate):
    """log Binomial(pool, 1 - exp(-rate)) pmf at k, elementwise."""
    pool = np.asarray(pool, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    rate = np.asarray(rate, dtype=np.float64)
    valid = (k >= 0) & (k <= pool) & (rate >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(-np.expm1(-rate))
        coef = gammaln(pool + 1.0) - gammaln(k + 1.0) - gammaln(pool - k + 1.0)
        out = coef + np.where(k > 0, k * logp, 0.0) - (pool - k) * rate
    return np.where(valid, out, -np.inf)


def sir_loglik_pointwise(s, i, istar, rstar, beta_t, gamma, n):
    """Per-day complete-data log-likelihood contributions, SIR."""
    pool_s = s[:-1]
    pool_i = i[:-1]
    rate_si = beta_t * (pool_i / float(n))
    return _logpmf_rate(pool_s, istar, rate_si) + _logpmf_rate(pool_i, rstar, gamma)


def sir_loglik(s, i, istar, rstar, beta_t, gamma, n):
    """Total complete-data log-likelihood, SIR; -inf when impossible."""
    return float(np.sum(sir_loglik_pointwise(s, i, istar, rstar, beta_t, gamma, n)))


def seir_loglik_pointwise(s, e, i, estar, istar, rstar, beta_t, lam, gamma, n):
    """Per-day complete-data log-likelihood contributions, SEIR."""
    pool_s = s[:-1]
    pool_e = e[:-1]
    pool_i = i[:-1]
    rate_se = beta_t * (pool_i / float(n))
    return (
        _logpmf_rate(pool_s, estar, rate_se)
        + _logpmf_rate(pool_e, istar, lam)
        + _logpmf_rate(pool_i, rstar, gamma)
    )


def seir_loglik(s, e, i, estar, istar, rstar, beta_t, lam, gamma, n):
    """Total complete-data log-likelihood, SEIR; -inf when impossible."""
    return float(
        np.sum(seir_loglik_pointwise(s, e, i, estar, istar, rstar, beta_t, lam, gamma, n))
    )
