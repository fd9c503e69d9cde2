"""Alarm-signal machinery: smoothed-incidence input and the alarm families.

The alarm on day t is a function of incidence observed strictly before t,
smoothed by a :class:`SmoothingRule`. Five families map the smoothed value
into [0, 1]: a one-parameter power curve, a change-point threshold, a Hill
curve, a natural-cubic-spline curve with movable knots, and a latent
Gaussian-process curve on the logit scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import expit

from . import gp
from .splines import natural_cubic_basis


class ConstraintViolation(ValueError):
    """A latent alarm curve left [0, 1]; the caller should reject it."""


@dataclass(frozen=True)
class SmoothingRule:
    """How incidence history is condensed into the alarm input.

    ``moving_average`` takes the mean of the ``window`` days strictly
    before the current day (fewer near the start); ``cumulative`` takes
    the running total of all prior days and ignores ``window``.
    """

    kind: str = "moving_average"
    window: int = 1

    def __post_init__(self):
        if self.kind not in ("moving_average", "cumulative"):
            raise ValueError(f"unknown smoothing kind: {self.kind!r}")
        if self.window < 1:
            raise ValueError("window must be >= 1")


def smooth_incidence(istar, rule: SmoothingRule, t: int) -> float:
    """Alarm input for 1-based day ``t``: history strictly before t.

    Day 1 has no history and returns 0. The moving average uses the
    min(window, t-1) most recent prior days.
    """
    if t < 1:
        raise ValueError("t is a 1-based day index")
    if t == 1:
        return 0.0
    istar = np.asarray(istar)
    if rule.kind == "cumulative":
        return float(np.sum(istar[: t - 1]))
    lo = max(0, (t - 1) - rule.window)
    return float(np.mean(istar[lo : t - 1]))


def smoothed_series(istar, rule: SmoothingRule, horizon: int | None = None) -> np.ndarray:
    """Alarm-input values for days 1..horizon (default len(istar))."""
    istar = np.asarray(istar, dtype=np.float64)
    horizon = istar.size if horizon is None else horizon
    if horizon > istar.size + 1:
        raise ValueError("horizon may exceed the incidence series by at most one day")
    csum = np.concatenate(([0.0], np.cumsum(istar)))
    out = np.empty(horizon, dtype=np.float64)
    out[0] = 0.0
    for j in range(1, horizon):
        if rule.kind == "cumulative":
            out[j] = csum[j]
        else:
            lo = max(0, j - rule.window)
            out[j] = (csum[j] - csum[lo]) / (j - lo)
    return out


@dataclass(frozen=True)
class NoAlarm:
    """Identically-zero alarm (no behavioral feedback)."""

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class PowerAlarm:
    """f(x) = 1 - (1 - x/n)^(1/k); k > 0 is the growth parameter."""

    k: float
    n: float

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if self.n <= 0:
            raise ValueError("n must be positive")

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0) or np.any(x > self.n):
            raise ValueError("x must lie in [0, n]")
        out = 1.0 - (1.0 - x / self.n) ** (1.0 / self.k)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ThresholdAlarm:
    """f(x) = delta * 1(x > h): zero until the change point is passed."""

    delta: float
    h: float

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.where(x > self.h, self.delta, 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class HillAlarm:
    """f(x) = delta / (1 + (x0/x)^nu), with f(0) = 0 by continuity.

    delta is the asymptote, x0 the half-occupation value, nu the growth
    exponent.
    """

    delta: float
    x0: float
    nu: float

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.x0 <= 0:
            raise ValueError("x0 must be positive")
        if self.nu <= 0:
            raise ValueError("nu must be positive")

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0):
            raise ValueError("x must be nonnegative")
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, self.delta / (1.0 + (self.x0 / x) ** self.nu), 0.0)
        return out if out.ndim else float(out)


@dataclass(eq=False)
class SplineAlarm:
    """Natural cubic spline over [0, x_max] with movable interior knots.

    Evaluation outside [0, 1] raises :class:`ConstraintViolation` so the
    inference layer can reject the proposal instead of clamping. Queries
    beyond x_max hold the boundary value (forecasting extrapolation rule).
    """

    knots: np.ndarray  # interior knots, strictly inside (0, x_max)
    coef: np.ndarray
    x_max: float

    def __post_init__(self):
        self.knots = np.sort(np.asarray(self.knots, dtype=np.float64))
        self.coef = np.asarray(self.coef, dtype=np.float64)
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if np.any(self.knots <= 0) or np.any(self.knots >= self.x_max):
            raise ValueError("interior knots must lie strictly inside (0, x_max)")
        if self.coef.size != self.knots.size + 2:
            raise ValueError("need one coefficient per basis function (knots + 2)")

    def full_knots(self) -> np.ndarray:
        return np.concatenate(([0.0], self.knots, [self.x_max]))

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        clipped = np.clip(x, 0.0, self.x_max)
        out = natural_cubic_basis(clipped, self.full_knots()) @ self.coef
        if np.any(out < 0.0) or np.any(out > 1.0):
            raise ConstraintViolation("spline alarm left [0, 1]")
        return out if x.ndim else float(out[0])


@dataclass(eq=False)
class GaussianProcessAlarm:
    """Latent logit-scale curve on a fixed grid over [0, x_max].

    Daily values come from linear interpolation of the latent values and
    the inverse logit; queries beyond the grid hold the last grid value.
    """

    grid: np.ndarray
    latent: np.ndarray  # logit-scale values at the grid points
    sigma: float
    ell: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.latent = np.asarray(self.latent, dtype=np.float64)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.latent.shape != self.grid.shape:
            raise ValueError("latent values must match the grid")
        if self.sigma <= 0 or self.ell <= 0:
            raise ValueError("sigma and ell must be positive")

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = expit(np.interp(x, self.grid, self.latent))
        return out if out.ndim else float(out)


AlarmSpec = Union[NoAlarm, PowerAlarm, ThresholdAlarm, HillAlarm, SplineAlarm, GaussianProcessAlarm]


def gp_prior_logdensity(spec: GaussianProcessAlarm) -> float:
    """Log density of the latent values under the anchored-mean GP prior."""
    chol = gp.covariance_cholesky(spec.grid, spec.sigma, spec.ell)
    mean = gp.anchored_mean(spec.grid, spec.x_max)
    return gp.mvn_logpdf(spec.latent, mean, chol)


@dataclass(eq=False)
class AlarmSignal:
    """Per-day alarm input x and alarm value a for days 1..horizon."""

    x: np.ndarray
    a: np.ndarray


def alarm_series(istar, rule: SmoothingRule, spec: AlarmSpec, horizon: int | None = None) -> AlarmSignal:
    """Alarm input and value for each day, from an incidence series.

    Day 1 carries no history: parametric families evaluate f(0) (which is
    zero for valid parameters) while the spline and Gaussian-process
    curves are pinned to zero by convention.
    """
    x = smoothed_series(istar, rule, horizon)
    a = np.asarray(spec.evaluate(x), dtype=np.float64).copy()
    if isinstance(spec, (SplineAlarm, GaussianProcessAlarm)):
        a[0] = 0.0
    return AlarmSignal(x=x, a=a)
