"""Prior descriptors and the default prior scheme.

Parameters are referred to by flat names: rates ``beta``/``gamma``/``lam``,
alarm parameters ``k``/``delta``/``h``/``x0``/``nu``, spline ``coef`` and
``knots`` vectors, Gaussian-process ``gp_z`` (whitened latent coordinates),
``gp_sigma``/``gp_ell``, intervention ``beta1``/``beta2``, flexible-rate
``betat_coef``, and initial conditions ``s0``/``i0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .alarms import GaussianProcessAlarm, gp_prior_logdensity

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GammaPrior:
    shape: float
    rate: float

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("gamma prior needs positive shape and rate")

    def logpdf(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0):
            return -math.inf
        val = (
            self.shape * math.log(self.rate)
            - gammaln(self.shape)
            + (self.shape - 1.0) * np.log(x)
            - self.rate * x
        )
        return float(np.sum(val))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2


@dataclass(frozen=True)
class UniformPrior:
    low: float
    high: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ValueError("uniform prior needs high > low")

    def logpdf(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= self.low) or np.any(x >= self.high):
            return -math.inf
        return -x.size * math.log(self.high - self.low)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.low, self.high, size=size)

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def variance(self) -> float:
        return (self.high - self.low) ** 2 / 12.0


@dataclass(frozen=True)
class NormalPrior:
    mean: float
    sd: float

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError("normal prior needs positive sd")

    def logpdf(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        val = -_LOG_SQRT_2PI - math.log(self.sd) - 0.5 * ((x - self.mean) / self.sd) ** 2
        return float(np.sum(val))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, self.sd, size=size)

    @property
    def variance(self) -> float:
        return self.sd**2


@dataclass(frozen=True)
class InverseGammaPrior:
    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("inverse-gamma prior needs positive shape and scale")

    def logpdf(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0):
            return -math.inf
        val = (
            self.shape * math.log(self.scale)
            - gammaln(self.shape)
            - (self.shape + 1.0) * np.log(x)
            - self.scale / x
        )
        return float(np.sum(val))

    def sample(self, rng: np.random.Generator, size=None):
        return 1.0 / rng.gamma(self.shape, 1.0 / self.scale, size=size)

    @property
    def mean(self) -> float:
        if self.shape <= 1:
            raise ValueError("mean undefined for shape <= 1")
        return self.scale / (self.shape - 1.0)

    @property
    def variance(self) -> float:
        if self.shape <= 2:
            raise ValueError("variance undefined for shape <= 2")
        return self.scale**2 / ((self.shape - 1.0) ** 2 * (self.shape - 2.0))


def practical_range_prior(x_max_distance: float, sd: float = 2.0) -> InverseGammaPrior:
    """Length-scale prior from the practical-range rule.

    The prior mean solves exp(-d^2 / (2 l^2)) = 0.05 at d = half the maximum
    observed distance, i.e. l* = d / sqrt(2 ln 20); shape and scale then give
    an inverse gamma with that mean and standard deviation ``sd``.
    """
    if x_max_distance <= 0:
        raise ValueError("x_max_distance must be positive")
    d = 0.5 * x_max_distance
    mean = d / math.sqrt(2.0 * math.log(20.0))
    shape = (mean / sd) ** 2 + 2.0
    if shape <= 2.0:
        raise ValueError("no inverse gamma with this mean/sd has finite variance")
    scale = mean * (shape - 1.0)
    return InverseGammaPrior(shape=shape, scale=scale)


Prior = GammaPrior | UniformPrior | NormalPrior | InverseGammaPrior


@dataclass(frozen=True)
class PriorSpec:
    """Per-parameter priors; range-dependent entries are filled by
    :meth:`resolved` once the observed smoothed-incidence range is known."""

    beta: Prior = GammaPrior(0.1, 0.1)
    gamma: Prior = GammaPrior(0.1, 0.1)
    lam: Prior = GammaPrior(0.1, 0.1)
    k: Prior = GammaPrior(0.1, 0.1)
    delta: Prior = UniformPrior(0.0, 1.0)
    h: Prior | None = None
    x0: Prior | None = None
    nu: Prior = GammaPrior(0.1, 0.1)
    coef: Prior = NormalPrior(0.0, 10.0)
    knots: Prior | None = None
    gp_sigma: Prior = GammaPrior(150.0, 50.0)
    gp_ell: Prior | None = None
    beta1: Prior = NormalPrior(0.0, 10.0)
    beta2: Prior = NormalPrior(0.0, 10.0)
    betat_coef: Prior = NormalPrior(0.0, 10.0)
    s0: Prior | None = None
    i0: Prior | None = None

    def resolved(self, x_min: float, x_max: float) -> "PriorSpec":
        """Fill range-dependent priors from the observed alarm-input range."""
        updates = {}
        if x_max > x_min:
            rng_prior = UniformPrior(x_min, x_max)
            for name in ("h", "x0", "knots"):
                if getattr(self, name) is None:
                    updates[name] = rng_prior
            if self.gp_ell is None:
                updates["gp_ell"] = practical_range_prior(x_max - x_min)
        return replace(self, **updates) if updates else self


_GP_Z = NormalPrior(0.0, 1.0)


def log_prior(theta: dict, priors: PriorSpec, gp: GaussianProcessAlarm | None = None) -> float:
    """Sum of component log prior densities; -inf outside any support.

    ``theta`` maps parameter names to scalar or vector values; vector
    entries contribute one independent term per element. A Gaussian-process
    alarm passed via ``gp`` adds the latent-curve prior density.
    """
    total = 0.0
    for name, value in theta.items():
        if name == "gp_z":
            contribution = _GP_Z.logpdf(value)
        else:
            prior = getattr(priors, name, None)
            if prior is None:
                raise ValueError(f"no prior configured for parameter {name!r}")
            contribution = prior.logpdf(value)
        if contribution == -math.inf:
            return -math.inf
        total += contribution
    if gp is not None:
        total += gp_prior_logdensity(gp)
    return total
