import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from epialarm.splines import natural_cubic_basis


def test_dimension_and_simple_columns():
    knots = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    xs = np.linspace(0, 4, 9)
    basis = natural_cubic_basis(xs, knots)
    assert basis.shape == (9, 5)
    np.testing.assert_allclose(basis[:, 0], 1.0)
    np.testing.assert_allclose(basis[:, 1], xs)


def test_against_natural_interpolating_spline():
    """Each basis column equals the unique natural cubic interpolant through
    its knot values (independent construction via scipy)."""
    rng = np.random.default_rng(5)
    for _ in range(10):
        interior = np.sort(rng.uniform(0.5, 9.5, size=3))
        knots = np.concatenate(([0.0], interior, [10.0]))
        xs = np.linspace(0, 10, 400)
        basis = natural_cubic_basis(xs, knots)
        at_knots = natural_cubic_basis(knots, knots)
        for j in range(knots.size):
            oracle = CubicSpline(knots, at_knots[:, j], bc_type="natural")
            np.testing.assert_allclose(basis[:, j], oracle(xs), atol=1e-9)


def test_linear_beyond_boundaries():
    knots = np.array([0.0, 2.0, 5.0, 7.0, 10.0])
    coef = np.array([0.3, -0.1, 0.02, -0.05, 0.04])
    left = np.array([-3.0, -2.0, -1.0])
    right = np.array([11.0, 12.0, 13.0])
    for xs in (left, right):
        vals = natural_cubic_basis(xs, knots) @ coef
        second_diff = vals[2] - 2 * vals[1] + vals[0]
        assert second_diff == pytest.approx(0.0, abs=1e-9)


def test_validation():
    with pytest.raises(ValueError):
        natural_cubic_basis([0.5], [1.0])
    with pytest.raises(ValueError):
        natural_cubic_basis([0.5], [1.0, 1.0, 2.0])


def test_two_knot_basis_is_linear_space():
    knots = np.array([0.0, 5.0])
    xs = np.linspace(-1, 6, 15)
    basis = natural_cubic_basis(xs, knots)
    assert basis.shape == (15, 2)
    np.testing.assert_allclose(basis[:, 0], 1.0)
    np.testing.assert_allclose(basis[:, 1], xs)
