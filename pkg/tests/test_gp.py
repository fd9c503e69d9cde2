import numpy as np
import pytest
from scipy.special import logit

import epialarm as ea
from epialarm import gp


class TestCovariance:
    def test_diagonal_is_sigma_squared(self):
        assert gp.gp_covariance(3.0, 3.0, sigma=1.7, ell=2.0) == pytest.approx(1.7**2)

    def test_unit_distance_value(self):
        assert gp.gp_covariance(0.0, 1.0, sigma=1.0, ell=1.0) == pytest.approx(
            np.exp(-0.5), rel=1e-12
        )
        assert gp.gp_covariance(0.0, 1.0, sigma=1.0, ell=1.0) == pytest.approx(0.60653, abs=5e-6)

    def test_decay_limit(self):
        assert gp.gp_covariance(0.0, 1e6, sigma=2.0, ell=3.0) == 0.0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            gp.gp_covariance(0.0, 1.0, sigma=0.0, ell=1.0)
        with pytest.raises(ValueError):
            gp.gp_covariance(0.0, 1.0, sigma=1.0, ell=-1.0)

    def test_gram_matrices_factorize(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            grid = np.sort(rng.uniform(0, 100, size=rng.integers(5, 60)))
            sigma = rng.uniform(0.1, 5)
            ell = rng.uniform(0.5, 50)
            chol = gp.covariance_cholesky(grid, sigma, ell)  # raises if not PSD
            cov = gp.covariance_matrix(grid, sigma, ell)
            np.testing.assert_allclose(cov, cov.T, atol=0)
            np.testing.assert_allclose(chol @ chol.T, cov, rtol=1e-8, atol=1e-10)


class TestAnchoredMean:
    def test_endpoints(self):
        grid = np.linspace(0, 40, 9)
        mean = gp.anchored_mean(grid, 40.0)
        assert mean[0] == pytest.approx(logit(0.01))
        assert mean[-1] == pytest.approx(logit(0.99))
        assert np.all(np.diff(mean) > 0)


class TestPriorLogDensity:
    def _spec(self, latent, grid=None, sigma=1.5, ell=5.0):
        grid = np.linspace(0, 20, len(latent)) if grid is None else grid
        return ea.GaussianProcessAlarm(grid=grid, latent=latent, sigma=sigma, ell=ell)

    def test_mean_is_mode(self):
        grid = np.linspace(0, 20, 12)
        mean = gp.anchored_mean(grid, 20.0)
        at_mean = ea.gp_prior_logdensity(self._spec(mean, grid))
        rng = np.random.default_rng(0)
        for _ in range(10):
            perturbed = mean + rng.normal(0, 0.5, size=mean.size)
            assert ea.gp_prior_logdensity(self._spec(perturbed, grid)) < at_mean

    def test_two_point_closed_form(self):
        grid = np.array([0.0, 4.0])
        sigma, ell = 1.2, 3.0
        latent = np.array([-1.0, 2.0])
        spec = self._spec(latent, grid, sigma, ell)
        mean = gp.anchored_mean(grid, 4.0)
        var = sigma**2 * (1 + gp.JITTER_FRACTION)
        off = sigma**2 * np.exp(-(4.0**2) / (2 * ell**2))
        cov = np.array([[var, off], [off, var]])
        dev = latent - mean
        det = var**2 - off**2
        quad = (var * dev[0] ** 2 - 2 * off * dev[0] * dev[1] + var * dev[1] ** 2) / det
        expected = -0.5 * (2 * np.log(2 * np.pi) + np.log(det) + quad)
        assert ea.gp_prior_logdensity(spec) == pytest.approx(expected, rel=1e-12)
        del cov

    def test_sigma_scaling_identity(self):
        grid = np.linspace(0, 10, 8)
        latent = gp.anchored_mean(grid, 10.0) + 0.3
        sigma, ell, c = 1.1, 4.0, 2.5
        base = ea.gp_prior_logdensity(self._spec(latent, grid, sigma, ell))
        scaled = ea.gp_prior_logdensity(self._spec(latent, grid, c * sigma, ell))
        # covariance (incl. jitter) scales by c^2 exactly: logdet grows by
        # p log(c^2), quadratic form shrinks by c^2
        mean = gp.anchored_mean(grid, 10.0)
        chol = gp.covariance_cholesky(grid, sigma, ell)
        from scipy.linalg import solve_triangular

        alpha = solve_triangular(chol, latent - mean, lower=True)
        quad = float(alpha @ alpha)
        expected = base - 0.5 * (grid.size * np.log(c**2) + quad / c**2 - quad)
        assert scaled == pytest.approx(expected, rel=1e-10)

    def test_whitened_roundtrip(self):
        grid = gp.latent_grid(35.0, 20)
        rng = np.random.default_rng(9)
        z = rng.normal(size=20)
        latent = gp.whiten_to_latent(z, grid, sigma=2.0, ell=8.0, x_max=35.0)
        chol = gp.covariance_cholesky(grid, 2.0, 8.0)
        back = np.linalg.solve(chol, latent - gp.anchored_mean(grid, 35.0))
        np.testing.assert_allclose(back, z, atol=1e-8)
