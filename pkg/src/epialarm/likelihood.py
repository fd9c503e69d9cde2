"""Complete-data log-likelihood of the chain-binomial models.

Invalid augmented states (negative compartments, draws exceeding their
pools, alarm curves leaving [0, 1]) map to a dedicated zero-likelihood
sentinel instead of numeric -inf, keeping acceptance-ratio arithmetic free
of inf - inf hazards.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as kernels
from .alarms import ConstraintViolation
from .chain import (
    AlarmDriven,
    Formulation,
    NegativeCompartment,
    Population,
    RateParams,
    TransitionSeries,
    beta_series,
    build_path,
)


class _ZeroLikelihood:
    """Sentinel for an impossible augmented state (posterior mass zero)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZERO_LOGLIK"


ZERO_LOGLIK = _ZeroLikelihood()

LogLik = float | _ZeroLikelihood


def is_zero(value: LogLik) -> bool:
    return value is ZERO_LOGLIK


def _betas(formulation, rates, ts, alarm_input):
    if isinstance(formulation, AlarmDriven) and alarm_input is None:
        alarm_input = ts.istar
    return beta_series(formulation, rates, ts.tau, alarm_input=alarm_input)


def complete_log_likelihood(
    ts: TransitionSeries,
    pop: Population,
    rates: RateParams,
    formulation: Formulation,
    alarm_input=None,
) -> LogLik:
    """Sum over days of the binomial transition log-pmfs.

    ``alarm_input`` is the incidence series feeding the alarm (defaults to
    ``ts.istar``); during fitting it should be the observed series so that
    imputation never feeds back into the alarm.
    """
    try:
        path = build_path(pop, ts)
        beta_t = _betas(formulation, rates, ts, alarm_input)
    except (NegativeCompartment, ConstraintViolation):
        return ZERO_LOGLIK
    if ts.seir:
        if rates.lam is None:
            raise ValueError("SEIR series needs a latent-progression rate")
        total = kernels.seir_loglik(
            path.s, path.e, path.i, ts.estar, ts.istar, ts.rstar,
            beta_t, rates.lam, rates.gamma, float(pop.n),
        )
    else:
        total = kernels.sir_loglik(
            path.s, path.i, ts.istar, ts.rstar, beta_t, rates.gamma, float(pop.n)
        )
    if not math.isfinite(total):
        return ZERO_LOGLIK
    return total


def pointwise_log_likelihood(
    ts: TransitionSeries,
    pop: Population,
    rates: RateParams,
    formulation: Formulation,
    alarm_input=None,
) -> np.ndarray:
    """Per-day log-likelihood contributions (the WAIC pointwise unit)."""
    path = build_path(pop, ts)
    beta_t = _betas(formulation, rates, ts, alarm_input)
    if ts.seir:
        return kernels.seir_loglik_pointwise(
            path.s, path.e, path.i, ts.estar, ts.istar, ts.rstar,
            beta_t, rates.lam, rates.gamma, float(pop.n),
        )
    return kernels.sir_loglik_pointwise(
        path.s, path.i, ts.istar, ts.rstar, beta_t, rates.gamma, float(pop.n)
    )
