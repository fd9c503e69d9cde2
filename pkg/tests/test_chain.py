import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import epialarm as ea


class TestBuildPath:
    def test_hand_unrolled(self):
        pop = ea.Population(n=10, s0=9, i0=1)
        ts = ea.TransitionSeries(istar=[1, 0], rstar=[0, 1])
        path = ea.build_path(pop, ts)
        assert path.s.tolist() == [9, 8, 8]
        assert path.i.tolist() == [1, 2, 1]
        assert path.r.tolist() == [0, 0, 1]

    def test_identity_case(self):
        pop = ea.Population(n=10, s0=9, i0=1)
        ts = ea.TransitionSeries(istar=[0, 0, 0], rstar=[0, 0, 0])
        path = ea.build_path(pop, ts)
        assert np.all(path.s == 9)
        assert np.all(path.i == 1)
        assert np.all(path.r == 0)

    def test_removal_exceeds_pool(self):
        pop = ea.Population(n=10, s0=9, i0=1)
        ts = ea.TransitionSeries(istar=[0], rstar=[2])
        with pytest.raises(ea.NegativeCompartment) as err:
            ea.build_path(pop, ts)
        assert err.value.day == 1
        assert err.value.compartment == "i"

    def test_seir_hand_unrolled(self):
        pop = ea.Population(n=10, s0=7, e0=2, i0=1)
        ts = ea.TransitionSeries(estar=[1, 0], istar=[2, 1], rstar=[0, 1])
        path = ea.build_path(pop, ts)
        assert path.s.tolist() == [7, 6, 6]
        assert path.e.tolist() == [2, 1, 0]
        assert path.i.tolist() == [1, 3, 3]
        assert path.r.tolist() == [0, 0, 1]
        assert np.all(path.s + path.e + path.i + path.r == 10)

    def test_population_invariant(self):
        with pytest.raises(ValueError):
            ea.Population(n=10, s0=9, i0=2)
        with pytest.raises(ValueError):
            ea.Population(n=10, s0=-1, i0=11)


class TestTransmissionProb:
    def test_small_rate_value(self):
        # 1 - exp(-0.6 * 5 / 1e6), cross-checked below at high precision
        assert ea.transmission_prob(0.6, 5, 1_000_000) == pytest.approx(
            2.9999955000045e-06, rel=1e-12
        )

    def test_high_precision_oracle(self):
        import mpmath

        mpmath.mp.dps = 50
        for beta, i, n in [(0.6, 5, 1_000_000), (0.3, 123, 10_000), (2.5, 9_999, 10_000)]:
            expected = float(1 - mpmath.e ** (-mpmath.mpf(beta) * i / n))
            assert ea.transmission_prob(beta, i, n) == pytest.approx(expected, rel=1e-14)

    def test_zero_cases(self):
        assert ea.transmission_prob(0.6, 0, 100) == 0.0
        assert ea.transmission_prob(0.0, 5, 100) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            ea.transmission_prob(-0.1, 5, 100)
        with pytest.raises(ValueError):
            ea.transmission_prob(0.5, -1, 100)
        with pytest.raises(ValueError):
            ea.transmission_prob(0.5, 101, 100)

    @given(
        beta=st.floats(0, 25),
        i=st.integers(0, 1000),
        n=st.integers(1000, 10_000),
    )
    def test_monotone_and_below_one(self, beta, i, n):
        # rate = beta*i/n stays <= 25 here, where float64 still resolves
        # the gap between 1 - exp(-rate) and 1
        p = ea.transmission_prob(beta, i, n)
        assert 0.0 <= p < 1.0
        assert ea.transmission_prob(beta + 0.5, i, n) >= p
        assert ea.transmission_prob(beta, min(i + 1, n), n) >= p

    def test_huge_rate_saturates_at_machine_precision(self):
        assert ea.transmission_prob(50.0, 1000, 1000) == 1.0


class TestExitProb:
    def test_value(self):
        assert ea.exit_prob(0.2) == pytest.approx(0.1812692469220182, rel=1e-12)

    def test_zero(self):
        assert ea.exit_prob(0.0) == 0.0

    def test_monotone_limit(self):
        rates = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
        probs = [ea.exit_prob(r) for r in rates]
        assert all(a < b for a, b in zip(probs, probs[1:]))
        assert ea.exit_prob(500.0) == pytest.approx(1.0, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            ea.exit_prob(-0.1)


class TestEffectiveBeta:
    @pytest.mark.parametrize("a,expected", [(0.0, 0.6), (1.0, 0.0), (0.5, 0.3)])
    def test_values(self, a, expected):
        assert ea.effective_beta(0.6, a) == pytest.approx(expected, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            ea.effective_beta(0.6, -0.01)
        with pytest.raises(ValueError):
            ea.effective_beta(0.6, 1.01)


class TestSimulate:
    def test_disease_free_absorbing(self):
        pop = ea.Population(n=100, s0=100, i0=0)
        rng = np.random.default_rng(0)
        ts = ea.simulate(pop, ea.RateParams(beta=0.6, gamma=0.2), ea.Constant(), 20, rng)
        assert not ts.istar.any()
        assert not ts.rstar.any()

    def test_zero_alarm_matches_constant_stream(self):
        pop = ea.Population(n=5000, s0=4990, i0=10)
        rates = ea.RateParams(beta=0.6, gamma=0.2)
        alarm = ea.AlarmDriven(
            alarm=ea.ThresholdAlarm(delta=0.0, h=1.0),
            smoothing=ea.SmoothingRule("moving_average", 7),
        )
        a = ea.simulate(pop, rates, alarm, 60, np.random.default_rng(42))
        b = ea.simulate(pop, rates, ea.Constant(), 60, np.random.default_rng(42))
        assert np.array_equal(a.istar, b.istar)
        assert np.array_equal(a.rstar, b.rstar)

    def test_determinism(self):
        pop = ea.Population(n=5000, s0=4990, i0=10)
        rates = ea.RateParams(beta=0.6, gamma=0.2)
        form = ea.AlarmDriven(
            alarm=ea.PowerAlarm(k=0.05, n=5000),
            smoothing=ea.SmoothingRule("moving_average", 7),
        )
        a = ea.simulate(pop, rates, form, 80, np.random.default_rng(7))
        b = ea.simulate(pop, rates, form, 80, np.random.default_rng(7))
        assert np.array_equal(a.istar, b.istar)
        assert np.array_equal(a.rstar, b.rstar)

    def test_simulated_series_build_and_conserve(self):
        pop = ea.Population(n=2000, s0=1990, i0=10)
        rates = ea.RateParams(beta=0.8, gamma=0.25)
        for seed in range(20):
            ts = ea.simulate(pop, rates, ea.Constant(), 50, np.random.default_rng(seed))
            path = ea.build_path(pop, ts)
            total = path.s + path.e + path.i + path.r
            assert np.all(total == pop.n)
            assert np.all(path.s >= 0) and np.all(path.i >= 0)

    def test_seir_simulation_builds(self):
        pop = ea.Population(n=2000, s0=1988, e0=2, i0=10)
        rates = ea.RateParams(beta=0.8, gamma=0.25, lam=0.3)
        ts = ea.simulate(pop, rates, ea.Constant(), 60, np.random.default_rng(3))
        assert ts.seir
        path = ea.build_path(pop, ts)
        assert np.all(path.s + path.e + path.i + path.r == pop.n)

    def test_feedback_closure(self):
        pop = ea.Population(n=5000, s0=4990, i0=10)
        rates = ea.RateParams(beta=0.9, gamma=0.2)
        smoothing = ea.SmoothingRule("moving_average", 7)
        spec = ea.HillAlarm(delta=0.8, x0=30.0, nu=2.0)
        form = ea.AlarmDriven(alarm=spec, smoothing=smoothing)
        ts, signal = ea.simulate(
            pop, rates, form, 80, np.random.default_rng(11), return_alarm=True
        )
        replay = ea.alarm_series(ts.istar, smoothing, spec)
        np.testing.assert_array_equal(replay.x, signal.x)
        np.testing.assert_array_equal(replay.a, signal.a)

    def test_intervention_and_flexible_beta_series(self):
        rates = ea.RateParams(beta=0.6, gamma=0.2)
        form = ea.Intervention(beta1=np.log(0.6), beta2=-0.1, tstar=5)
        betas = ea.beta_series(form, rates, 8)
        assert betas[:5] == pytest.approx([0.6] * 5)
        assert betas[5] == pytest.approx(0.6 * np.exp(-0.1))
        flex = ea.FlexibleBetaT(knots=[1.0, 5.0, 10.0], coef=[np.log(0.4), 0.0, 0.0])
        flat = ea.beta_series(flex, rates, 10)
        assert flat == pytest.approx([0.4] * 10)


@pytest.mark.slow
def test_large_population_ensemble_oracle():
    """Mean peak-day incidence against an independent chain-binomial loop."""

    def oracle_peak(seed):
        rng = np.random.default_rng(seed)
        s, i = 999_995, 5
        n, beta, gamma = 1_000_000, 0.6, 0.2
        p_rem = 1.0 - np.exp(-gamma)
        peak = 0
        for _ in range(100):
            p_inf = 1.0 - np.exp(-beta * i / n)
            new_i = rng.binomial(s, p_inf)
            new_r = rng.binomial(i, p_rem)
            s -= new_i
            i += new_i - new_r
            peak = max(peak, new_i)
        return peak

    pop = ea.Population(n=1_000_000, s0=999_995, i0=5)
    rates = ea.RateParams(beta=0.6, gamma=0.2)
    n_seeds = 400
    mine = np.array(
        [
            ea.simulate(pop, rates, ea.Constant(), 100, np.random.default_rng(10_000 + k)).istar.max()
            for k in range(n_seeds)
        ],
        dtype=float,
    )
    ref = np.array([oracle_peak(20_000 + k) for k in range(n_seeds)], dtype=float)
    se = np.sqrt(mine.var(ddof=1) / n_seeds + ref.var(ddof=1) / n_seeds)
    assert abs(mine.mean() - ref.mean()) < 4 * se
