"""Discrete-time chain-binomial SIR/SEIR bookkeeping and forward simulation.

Indexing convention: transition arrays are 0-based with entry t-1 holding
the day-t transitions (t = 1..tau); compartment paths have length tau + 1
with index 0 holding the initial conditions, so the day-t transitions move
counts from path index t-1 to t.

A model is SEIR when ``RateParams.lam`` is set (and the transition series
carries an exposure series); otherwise SIR. The alarm machinery is shared
between the two structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels as kernels
from .alarms import (
    AlarmSignal,
    AlarmSpec,
    GaussianProcessAlarm,
    SmoothingRule,
    SplineAlarm,
    alarm_series,
    smooth_incidence,
)
from .splines import natural_cubic_basis

_COMP_NAMES = {"s": "susceptible", "e": "exposed", "i": "infectious", "r": "removed"}


class NegativeCompartment(ValueError):
    """A transition series would drive a compartment count negative.

    Signals inconsistent transition data; the inference layer treats such
    proposals as zero-likelihood rather than clamping.
    """

    def __init__(self, day: int, compartment: str):
        self.day = day
        self.compartment = compartment
        super().__init__(
            f"{_COMP_NAMES.get(compartment, compartment)} count negative on day {day}"
        )


@dataclass(frozen=True)
class Population:
    """Closed-population size and initial compartment counts."""

    n: int
    s0: int
    i0: int
    e0: int = 0
    r0: int = 0

    def __post_init__(self):
        for name in ("n", "s0", "i0", "e0", "r0"):
            value = getattr(self, name)
            if value != int(value) or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer")
        if self.s0 + self.e0 + self.i0 + self.r0 != self.n:
            raise ValueError("initial compartments must sum to the population size")


@dataclass(eq=False)
class TransitionSeries:
    """Daily transition counts: new infectious/removals (+ exposures, SEIR)."""

    istar: np.ndarray
    rstar: np.ndarray
    estar: np.ndarray | None = None

    def __post_init__(self):
        self.istar = _as_count_array(self.istar, "istar")
        self.rstar = _as_count_array(self.rstar, "rstar")
        if self.estar is not None:
            self.estar = _as_count_array(self.estar, "estar")
            if self.estar.size != self.istar.size:
                raise ValueError("estar length must match istar")
        if self.rstar.size != self.istar.size:
            raise ValueError("rstar length must match istar")

    @property
    def tau(self) -> int:
        return self.istar.size

    @property
    def seir(self) -> bool:
        return self.estar is not None

    def copy(self) -> "TransitionSeries":
        return TransitionSeries(
            istar=self.istar.copy(),
            rstar=self.rstar.copy(),
            estar=None if self.estar is None else self.estar.copy(),
        )


def _as_count_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and (np.any(arr < 0) or np.any(arr != np.floor(arr))):
        raise ValueError(f"{name} entries must be nonnegative integers")
    return arr.astype(np.int64)


@dataclass(eq=False)
class CompartmentPath:
    """Per-day compartment occupancy, length tau + 1; e is all zero for SIR."""

    s: np.ndarray
    e: np.ndarray
    i: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return int(self.s[0] + self.e[0] + self.i[0] + self.r[0])

    @property
    def tau(self) -> int:
        return self.s.size - 1


@dataclass(frozen=True)
class RateParams:
    """Baseline transmission/removal rates; ``lam`` set means SEIR."""

    beta: float
    gamma: float
    lam: float | None = None

    def __post_init__(self):
        if self.beta <= 0 or self.gamma <= 0:
            raise ValueError("beta and gamma must be positive")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive")

    @property
    def seir(self) -> bool:
        return self.lam is not None


def build_path(pop: Population, ts: TransitionSeries) -> CompartmentPath:
    """Compartment paths induced by the difference equations.

    Raises :class:`NegativeCompartment` (rather than clamping) as soon as
    any compartment would go negative.
    """
    if ts.seir:
        s, e, i, r, bad_day, bad_comp = kernels.seir_path(
            pop.s0, pop.e0, pop.i0, pop.r0, ts.estar, ts.istar, ts.rstar
        )
    else:
        if pop.e0:
            raise ValueError("e0 must be zero for an SIR series")
        s, i, r, bad_day, bad_comp = kernels.sir_path(
            pop.s0, pop.i0, pop.r0, ts.istar, ts.rstar
        )
        e = np.zeros_like(s)
    if bad_day >= 0:
        raise NegativeCompartment(bad_day, bad_comp)
    return CompartmentPath(s=s, e=e, i=i, r=r)


def transmission_prob(beta_t, i_t, n):
    """Infection probability 1 - exp(-beta_t * i_t / n), elementwise."""
    beta_t = np.asarray(beta_t, dtype=np.float64)
    i_t = np.asarray(i_t, dtype=np.float64)
    if np.any(beta_t < 0):
        raise ValueError("beta_t must be nonnegative")
    if n <= 0:
        raise ValueError("n must be positive")
    if np.any(i_t < 0) or np.any(i_t > n):
        raise ValueError("i_t must lie in [0, n]")
    out = -np.expm1(-beta_t * i_t / n)
    return out if out.ndim else float(out)


def exit_prob(rate):
    """Daily exit probability 1 - exp(-rate) for an exponential dwell time."""
    rate = np.asarray(rate, dtype=np.float64)
    if np.any(rate < 0):
        raise ValueError("rate must be nonnegative")
    out = -np.expm1(-rate)
    return out if out.ndim else float(out)


def effective_beta(beta: float, alarm_value):
    """Transmission rate under alarm: beta * (1 - a)."""
    alarm_value = np.asarray(alarm_value, dtype=np.float64)
    if beta <= 0:
        raise ValueError("beta must be positive")
    if np.any(alarm_value < 0) or np.any(alarm_value > 1):
        raise ValueError("alarm value must lie in [0, 1]")
    out = beta * (1.0 - alarm_value)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Transmission-rate formulations


@dataclass(frozen=True)
class Constant:
    """Time-constant transmission; ``beta=None`` defers to RateParams."""

    beta: float | None = None


@dataclass(eq=False)
class FlexibleBetaT:
    """log beta_t as a natural cubic spline over days 1..t_max.

    Queries beyond t_max (forecasting) hold the boundary value.
    """

    knots: np.ndarray  # full knot vector over time, boundaries included
    coef: np.ndarray

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=np.float64)
        self.coef = np.asarray(self.coef, dtype=np.float64)
        if self.coef.size != self.knots.size:
            raise ValueError("need one coefficient per basis function")

    def beta_at(self, days) -> np.ndarray:
        days = np.clip(np.asarray(days, dtype=np.float64), self.knots[0], self.knots[-1])
        return np.exp(natural_cubic_basis(days, self.knots) @ self.coef)


@dataclass(frozen=True)
class Intervention:
    """exp(beta1) until day tstar, exponential decay exp(beta2 (t - tstar)) after."""

    beta1: float
    beta2: float
    tstar: int

    def beta_at(self, days) -> np.ndarray:
        days = np.asarray(days, dtype=np.float64)
        return np.exp(self.beta1 + self.beta2 * np.maximum(days - self.tstar, 0.0))


@dataclass(eq=False)
class AlarmDriven:
    """Baseline transmission scaled by 1 - a_t with a_t fed by incidence."""

    alarm: AlarmSpec
    smoothing: SmoothingRule


Formulation = Union[Constant, FlexibleBetaT, Intervention, AlarmDriven]


def beta_series(
    formulation: Formulation,
    rates: RateParams,
    horizon: int,
    alarm_input=None,
) -> np.ndarray:
    """Per-day transmission rates for days 1..horizon.

    For alarm formulations the alarm input is the observed incidence
    series (``alarm_input``), replayed through the smoothing rule.
    """
    days = np.arange(1, horizon + 1, dtype=np.float64)
    if isinstance(formulation, Constant):
        beta = rates.beta if formulation.beta is None else formulation.beta
        return np.full(horizon, float(beta))
    if isinstance(formulation, (FlexibleBetaT, Intervention)):
        return formulation.beta_at(days)
    if isinstance(formulation, AlarmDriven):
        if alarm_input is None:
            raise ValueError("alarm formulations need the incidence series")
        signal = alarm_series(alarm_input, formulation.smoothing, formulation.alarm, horizon)
        return rates.beta * (1.0 - signal.a)
    raise TypeError(f"unknown formulation: {formulation!r}")


# ---------------------------------------------------------------------------
# Forward simulation


def simulate(
    pop: Population,
    rates: RateParams,
    formulation: Formulation,
    horizon: int,
    rng: np.random.Generator,
    return_alarm: bool = False,
):
    """Stochastic forward simulation of the chain-binomial model.

    Daily transitions are binomial draws from the current pools. For alarm
    formulations the alarm is recomputed each day from the incidence
    simulated so far, closing the feedback loop. Identical seeds give
    identical output.

    Returns the :class:`TransitionSeries`, plus the per-day
    :class:`AlarmSignal` actually used when ``return_alarm`` is set.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    ts, signal = _forward(
        s=pop.s0,
        e=pop.e0,
        i=pop.i0,
        n=pop.n,
        rates=rates,
        formulation=formulation,
        horizon=horizon,
        rng=rng,
        history=np.empty(0, dtype=np.int64),
        obs_fraction=1.0,
        start_day=1,
    )
    if return_alarm:
        return ts, signal
    return ts


def _forward(
    s: int,
    e: int,
    i: int,
    n: int,
    rates: RateParams,
    formulation: Formulation,
    horizon: int,
    rng: np.random.Generator,
    history: np.ndarray,
    obs_fraction: float,
    start_day: int,
):
    """Simulation engine shared by :func:`simulate` and forecasting.

    ``history`` holds the incidence that informs the alarm for days before
    ``start_day``; newly simulated incidence is appended after thinning by
    ``obs_fraction`` (no thinning draw is made when the fraction is 1, so
    RNG streams match the no-thinning model exactly).
    """
    seir = rates.seir
    alarm = isinstance(formulation, AlarmDriven)
    if not alarm:
        betas = beta_series(formulation, rates, start_day + horizon - 1)[start_day - 1 :]
    pi_ir = exit_prob(rates.gamma)
    pi_ei = exit_prob(rates.lam) if seir else None

    estar = np.zeros(horizon, dtype=np.int64) if seir else None
    istar = np.zeros(horizon, dtype=np.int64)
    rstar = np.zeros(horizon, dtype=np.int64)
    xs = np.zeros(horizon, dtype=np.float64)
    a_vals = np.zeros(horizon, dtype=np.float64)
    observed = list(history)

    for j in range(horizon):
        day = start_day + j
        if alarm:
            x = smooth_incidence(np.asarray(observed), formulation.smoothing, day)
            if day == 1 and isinstance(formulation.alarm, (SplineAlarm, GaussianProcessAlarm)):
                a = 0.0
            else:
                a = float(formulation.alarm.evaluate(x))
            beta_t = rates.beta * (1.0 - a)
            xs[j], a_vals[j] = x, a
        else:
            beta_t = float(betas[j])
        p_inf = transmission_prob(beta_t, i, n)
        if seir:
            new_e = int(rng.binomial(s, p_inf))
            new_i = int(rng.binomial(e, pi_ei))
        else:
            new_e = 0
            new_i = int(rng.binomial(s, p_inf))
        new_r = int(rng.binomial(i, pi_ir))
        if seir:
            estar[j] = new_e
            s -= new_e
            e += new_e - new_i
        else:
            s -= new_i
        istar[j] = new_i
        rstar[j] = new_r
        i += new_i - new_r
        if obs_fraction < 1.0:
            observed.append(int(rng.binomial(new_i, obs_fraction)))
        else:
            observed.append(new_i)

    ts = TransitionSeries(istar=istar, rstar=rstar, estar=estar)
    return ts, AlarmSignal(x=xs, a=a_vals)
