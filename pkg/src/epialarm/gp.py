"""Gaussian-process machinery for the latent alarm curve.

The latent function lives on the logit scale over a fixed grid of smoothed
incidence values; daily alarm values come from linear interpolation of the
latent values followed by the inverse logit. The prior is a multivariate
normal with a squared-exponential covariance and an increasing linear mean
anchored near logit(0) at x = 0 and logit(1) at x = x_max.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logit

# Fraction of sigma^2 added to the covariance diagonal before factorization.
JITTER_FRACTION = 1e-6

# Mean-anchor offset: logit(0)/logit(1) are infinite, so the mean runs from
# logit(MEAN_EPS) to logit(1 - MEAN_EPS).
MEAN_EPS = 0.01

_LOG_2PI = float(np.log(2.0 * np.pi))


def gp_covariance(x1, x2, sigma: float, ell: float):
    """Squared-exponential covariance sigma^2 exp(-(x1-x2)^2 / (2 ell^2))."""
    if sigma <= 0 or ell <= 0:
        raise ValueError("sigma and ell must be positive")
    diff = np.asarray(x1, dtype=np.float64) - np.asarray(x2, dtype=np.float64)
    out = sigma**2 * np.exp(-(diff**2) / (2.0 * ell**2))
    return out if out.ndim else float(out)


def covariance_matrix(grid, sigma: float, ell: float, jitter: bool = True) -> np.ndarray:
    """Gram matrix of :func:`gp_covariance` over ``grid`` (+ diagonal jitter)."""
    grid = np.asarray(grid, dtype=np.float64)
    cov = gp_covariance(grid[:, None], grid[None, :], sigma, ell)
    if jitter:
        cov = cov + JITTER_FRACTION * sigma**2 * np.eye(grid.size)
    return cov


def covariance_cholesky(grid, sigma: float, ell: float) -> np.ndarray:
    """Lower Cholesky factor of the jittered Gram matrix.

    Raises
    ------
    np.linalg.LinAlgError
        If the factorization fails even with jitter.
    """
    return np.linalg.cholesky(covariance_matrix(grid, sigma, ell))


def anchored_mean(grid, x_max: float) -> np.ndarray:
    """Linear-in-x prior mean from logit(eps) at 0 to logit(1-eps) at x_max."""
    grid = np.asarray(grid, dtype=np.float64)
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    lo = float(logit(MEAN_EPS))
    hi = float(logit(1.0 - MEAN_EPS))
    return lo + (hi - lo) * grid / x_max


def mvn_logpdf(y, mean, chol: np.ndarray) -> float:
    """Multivariate normal log density given a lower Cholesky factor."""
    y = np.asarray(y, dtype=np.float64)
    dev = y - np.asarray(mean, dtype=np.float64)
    alpha = solve_triangular(chol, dev, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (y.size * _LOG_2PI + logdet + float(alpha @ alpha))


def latent_grid(x_max: float, size: int = 50) -> np.ndarray:
    """Equally spaced latent-function grid over [0, x_max]."""
    if size < 2:
        raise ValueError("grid needs at least two points")
    return np.linspace(0.0, float(x_max), size)


def whiten_to_latent(z, grid, sigma: float, ell: float, x_max: float) -> np.ndarray:
    """Map standard-normal coordinates to latent logit values."""
    chol = covariance_cholesky(grid, sigma, ell)
    return anchored_mean(grid, x_max) + chol @ np.asarray(z, dtype=np.float64)


def solve_psd(grid, sigma: float, ell: float, rhs) -> np.ndarray:
    """Solve K v = rhs for the jittered Gram matrix K."""
    factor = cho_factor(covariance_matrix(grid, sigma, ell), lower=True)
    return cho_solve(factor, np.asarray(rhs, dtype=np.float64))
