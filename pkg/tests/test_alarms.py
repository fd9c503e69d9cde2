import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expit

import epialarm as ea
from epialarm.alarms import smoothed_series


class TestSmoothIncidence:
    def test_worked_example(self):
        rule = ea.SmoothingRule("moving_average", 14)
        assert ea.smooth_incidence([10, 20], rule, 3) == pytest.approx(15.0)

    def test_day_one_is_zero(self):
        rule = ea.SmoothingRule("moving_average", 5)
        assert ea.smooth_incidence([100, 200, 300], rule, 1) == 0.0
        assert ea.smooth_incidence([], ea.SmoothingRule("cumulative"), 1) == 0.0

    def test_window_mean(self):
        rule = ea.SmoothingRule("moving_average", 2)
        assert ea.smooth_incidence([5, 5, 5, 5], rule, 5) == pytest.approx(5.0)
        assert ea.smooth_incidence([1, 2, 30, 50], rule, 5) == pytest.approx(40.0)

    def test_cumulative(self):
        rule = ea.SmoothingRule("cumulative")
        assert ea.smooth_incidence([3, 4, 5], rule, 4) == pytest.approx(12.0)
        assert ea.smooth_incidence([3, 4, 5], rule, 2) == pytest.approx(3.0)

    @given(st.lists(st.integers(0, 100), min_size=1, max_size=30), st.integers(2, 31))
    def test_wide_window_is_full_history_mean(self, counts, t):
        t = min(t, len(counts) + 1)
        rule = ea.SmoothingRule("moving_average", window=len(counts) + 5)
        expected = float(np.mean(counts[: t - 1])) if t > 1 else 0.0
        assert ea.smooth_incidence(counts, rule, t) == pytest.approx(expected)

    @given(st.lists(st.integers(0, 100), min_size=2, max_size=30))
    def test_window_one_is_previous_day(self, counts):
        rule = ea.SmoothingRule("moving_average", 1)
        for t in range(2, len(counts) + 2):
            assert ea.smooth_incidence(counts, rule, t) == pytest.approx(counts[t - 2])

    def test_series_matches_scalar(self):
        counts = [0, 3, 9, 1, 4, 4, 8]
        for rule in (ea.SmoothingRule("moving_average", 3), ea.SmoothingRule("cumulative")):
            series = smoothed_series(counts, rule)
            for t in range(1, len(counts) + 1):
                assert series[t - 1] == pytest.approx(ea.smooth_incidence(counts, rule, t))


class TestPowerAlarm:
    def test_endpoints(self):
        alarm = ea.PowerAlarm(k=0.3, n=1000)
        assert alarm.evaluate(0.0) == 0.0
        assert alarm.evaluate(1000.0) == pytest.approx(1.0)

    def test_k_one_is_linear(self):
        alarm = ea.PowerAlarm(k=1.0, n=1000)
        xs = np.linspace(0, 1000, 101)
        np.testing.assert_allclose(alarm.evaluate(xs), xs / 1000, rtol=0, atol=1e-15)

    def test_domain_errors(self):
        alarm = ea.PowerAlarm(k=1.0, n=100)
        with pytest.raises(ValueError):
            alarm.evaluate(-1.0)
        with pytest.raises(ValueError):
            alarm.evaluate(101.0)
        with pytest.raises(ValueError):
            ea.PowerAlarm(k=0.0, n=100)

    @given(st.floats(0.01, 10), st.floats(0, 1))
    def test_monotone_in_x_decreasing_in_k(self, k, frac):
        n = 1000.0
        x = frac * n
        alarm = ea.PowerAlarm(k=k, n=n)
        val = alarm.evaluate(x)
        assert 0.0 <= val <= 1.0
        assert alarm.evaluate(min(x + 10, n)) >= val - 1e-12
        assert ea.PowerAlarm(k=k + 0.5, n=n).evaluate(x) <= val + 1e-12


class TestThresholdAlarm:
    def test_strict_inequality_at_h(self):
        alarm = ea.ThresholdAlarm(delta=0.8, h=350.0)
        assert alarm.evaluate(350.0) == 0.0
        assert alarm.evaluate(350.0 + 1e-9) == pytest.approx(0.8)

    def test_zero_delta(self):
        alarm = ea.ThresholdAlarm(delta=0.0, h=10.0)
        assert not np.any(alarm.evaluate(np.linspace(0, 100, 50)))

    def test_delta_bounds(self):
        with pytest.raises(ValueError):
            ea.ThresholdAlarm(delta=1.2, h=1.0)


class TestHillAlarm:
    def test_half_occupation_identity(self):
        assert ea.HillAlarm(delta=0.85, x0=450.0, nu=2.0).evaluate(450.0) == pytest.approx(0.425)
        for delta in (0.1, 0.5, 1.0):
            for nu in (0.5, 1.0, 3.0, 8.0):
                alarm = ea.HillAlarm(delta=delta, x0=77.0, nu=nu)
                assert alarm.evaluate(77.0) == pytest.approx(delta / 2, rel=1e-12)

    def test_zero_limit(self):
        assert ea.HillAlarm(delta=0.9, x0=10.0, nu=2.0).evaluate(0.0) == 0.0

    @given(st.floats(0.05, 1), st.floats(1, 500), st.floats(0.2, 6))
    def test_monotone_bounded(self, delta, x0, nu):
        alarm = ea.HillAlarm(delta=delta, x0=x0, nu=nu)
        xs = np.linspace(0, 5 * x0, 40)
        vals = alarm.evaluate(xs)
        assert np.all(np.diff(vals) >= -1e-12)
        assert np.all((vals >= 0) & (vals <= delta + 1e-12))


class TestSplineAlarm:
    def test_zero_coefficients(self):
        alarm = ea.SplineAlarm(knots=[10.0, 20.0, 30.0], coef=np.zeros(5), x_max=50.0)
        assert not np.any(alarm.evaluate(np.linspace(0, 50, 20)))

    def test_constraint_violation(self):
        alarm = ea.SplineAlarm(knots=[10.0, 20.0, 30.0], coef=[1.2, 0, 0, 0, 0], x_max=50.0)
        with pytest.raises(ea.ConstraintViolation):
            alarm.evaluate(np.linspace(0, 50, 20))

    def test_extrapolation_holds_boundary(self):
        alarm = ea.SplineAlarm(
            knots=[10.0, 20.0, 30.0], coef=[0.1, 0.01, 0.0, 0.0, 0.0], x_max=50.0
        )
        assert alarm.evaluate(80.0) == pytest.approx(alarm.evaluate(50.0))


class TestGaussianProcessAlarm:
    def _spec(self, latent):
        grid = np.linspace(0.0, 100.0, len(latent))
        return ea.GaussianProcessAlarm(grid=grid, latent=np.asarray(latent, float), sigma=1.0, ell=20.0)

    def test_zero_latent_is_half(self):
        spec = self._spec([0.0] * 5)
        np.testing.assert_allclose(spec.evaluate(np.linspace(0, 100, 11)), 0.5)

    def test_on_grid_identity(self):
        spec = self._spec([-2.0, -1.0, 0.5, 1.0, 3.0])
        for g, lat in zip(spec.grid, spec.latent):
            assert spec.evaluate(float(g)) == pytest.approx(expit(lat), rel=1e-12)

    def test_midpoint_interpolation(self):
        spec = ea.GaussianProcessAlarm(
            grid=np.array([0.0, 10.0]), latent=np.array([0.0, 2.0]), sigma=1.0, ell=5.0
        )
        assert spec.evaluate(5.0) == pytest.approx(expit(1.0), rel=1e-12)
        assert spec.evaluate(5.0) == pytest.approx(0.7310585786300049, rel=1e-12)

    def test_extrapolation_holds_last_value(self):
        spec = self._spec([-2.0, -1.0, 0.5, 1.0, 3.0])
        assert spec.evaluate(500.0) == pytest.approx(expit(3.0))


class TestAlarmSeries:
    def test_quiet_epidemic_is_zero(self):
        rule = ea.SmoothingRule("moving_average", 7)
        istar = np.zeros(20, dtype=int)
        for spec in (
            ea.PowerAlarm(k=0.5, n=1000),
            ea.ThresholdAlarm(delta=0.7, h=5.0),
            ea.HillAlarm(delta=0.9, x0=10.0, nu=2.0),
        ):
            signal = ea.alarm_series(istar, rule, spec)
            assert not signal.a.any()

    def test_threshold_jump_day(self):
        # window mean of the two prior days crosses h=10 exactly when the
        # running mean first exceeds 10
        rule = ea.SmoothingRule("moving_average", 2)
        istar = np.array([0, 8, 16, 30, 0, 0], dtype=int)
        spec = ea.ThresholdAlarm(delta=0.6, h=10.0)
        signal = ea.alarm_series(istar, rule, spec)
        x = smoothed_series(istar, rule)
        expected_jump = next(t for t in range(len(istar)) if x[t] > 10.0)
        assert not signal.a[:expected_jump].any()
        assert signal.a[expected_jump] == pytest.approx(0.6)

    def test_spline_gp_day_one_convention(self):
        rule = ea.SmoothingRule("moving_average", 3)
        istar = np.array([5, 5, 5, 5], dtype=int)
        gp_spec = ea.GaussianProcessAlarm(
            grid=np.linspace(0, 10, 5), latent=np.full(5, 2.0), sigma=1.0, ell=3.0
        )
        signal = ea.alarm_series(istar, rule, gp_spec)
        assert signal.a[0] == 0.0
        assert np.all(signal.a[1:] > 0.5)

    def test_no_alarm_spec(self):
        rule = ea.SmoothingRule("cumulative")
        signal = ea.alarm_series([3, 1, 4], rule, ea.NoAlarm())
        assert not signal.a.any()
