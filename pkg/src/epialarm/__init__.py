"""Chain-binomial epidemic models with incidence-driven behavioral feedback.

Simulation, data-augmented Bayesian fitting, model comparison (WAIC), and
posterior-predictive forecasting for discrete-time SIR/SEIR models whose
transmission rate is reduced by a population alarm computed from recently
observed incidence.
"""

from ._kernels import IMPL as kernel_impl
from .alarms import (
    AlarmSignal,
    ConstraintViolation,
    GaussianProcessAlarm,
    HillAlarm,
    NoAlarm,
    PowerAlarm,
    SmoothingRule,
    SplineAlarm,
    ThresholdAlarm,
    alarm_series,
    gp_prior_logdensity,
    smooth_incidence,
)
from .chain import (
    AlarmDriven,
    CompartmentPath,
    Constant,
    FlexibleBetaT,
    Intervention,
    NegativeCompartment,
    Population,
    RateParams,
    TransitionSeries,
    beta_series,
    build_path,
    effective_beta,
    exit_prob,
    simulate,
    transmission_prob,
)

__all__ = [
    "kernel_impl",
    "AlarmSignal",
    "ConstraintViolation",
    "GaussianProcessAlarm",
    "HillAlarm",
    "NoAlarm",
    "PowerAlarm",
    "SmoothingRule",
    "SplineAlarm",
    "ThresholdAlarm",
    "alarm_series",
    "gp_prior_logdensity",
    "smooth_incidence",
    "AlarmDriven",
    "CompartmentPath",
    "Constant",
    "FlexibleBetaT",
    "Intervention",
    "NegativeCompartment",
    "Population",
    "RateParams",
    "TransitionSeries",
    "beta_series",
    "build_path",
    "effective_beta",
    "exit_prob",
    "simulate",
    "transmission_prob",
]
