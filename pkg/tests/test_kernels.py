"""Parity between the compiled extension and the numpy fallback."""

import numpy as np
import pytest

import epialarm as ea
from epialarm._kernels import _pure

try:
    from epialarm._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def _random_fit(seed, seir=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(500, 5000))
    i0 = int(rng.integers(1, 20))
    e0 = int(rng.integers(0, 10)) if seir else 0
    pop = ea.Population(n=n, s0=n - i0 - e0, e0=e0, i0=i0)
    rates = ea.RateParams(
        beta=float(rng.uniform(0.2, 1.5)),
        gamma=float(rng.uniform(0.1, 0.6)),
        lam=float(rng.uniform(0.1, 0.6)) if seir else None,
    )
    ts = ea.simulate(pop, rates, ea.Constant(), int(rng.integers(10, 80)), rng)
    beta_t = rng.uniform(0.05, 1.5, size=ts.tau)
    return pop, rates, ts, beta_t


@needs_core
@pytest.mark.parametrize("seed", range(25))
def test_sir_parity(seed):
    pop, rates, ts, beta_t = _random_fit(seed)
    res_p = _pure.sir_path(pop.s0, pop.i0, pop.r0, ts.istar, ts.rstar)
    res_c = _core.sir_path(pop.s0, pop.i0, pop.r0, ts.istar, ts.rstar)
    for a, b in zip(res_p[:3], res_c[:3]):
        np.testing.assert_array_equal(a, b)
    assert res_p[3:] == res_c[3:]

    s, i = res_p[0], res_p[1]
    ll_p = _pure.sir_loglik(s, i, ts.istar, ts.rstar, beta_t, rates.gamma, pop.n)
    ll_c = _core.sir_loglik(s, i, ts.istar, ts.rstar, beta_t, rates.gamma, pop.n)
    # scipy gammaln vs libc lgamma differ by ~1 ulp of the (large)
    # log-factorial terms; tolerance scales with that magnitude
    assert ll_c == pytest.approx(ll_p, rel=1e-9, abs=1e-7)
    pw_p = _pure.sir_loglik_pointwise(s, i, ts.istar, ts.rstar, beta_t, rates.gamma, pop.n)
    pw_c = _core.sir_loglik_pointwise(s, i, ts.istar, ts.rstar, beta_t, rates.gamma, pop.n)
    np.testing.assert_allclose(pw_c, pw_p, rtol=1e-9, atol=1e-7)


@needs_core
@pytest.mark.parametrize("seed", range(25, 40))
def test_seir_parity(seed):
    pop, rates, ts, beta_t = _random_fit(seed, seir=True)
    res_p = _pure.seir_path(pop.s0, pop.e0, pop.i0, pop.r0, ts.estar, ts.istar, ts.rstar)
    res_c = _core.seir_path(pop.s0, pop.e0, pop.i0, pop.r0, ts.estar, ts.istar, ts.rstar)
    for a, b in zip(res_p[:4], res_c[:4]):
        np.testing.assert_array_equal(a, b)
    assert res_p[4:] == res_c[4:]

    s, e, i = res_p[0], res_p[1], res_p[2]
    args = (s, e, i, ts.estar, ts.istar, ts.rstar, beta_t, rates.lam, rates.gamma, pop.n)
    assert _core.seir_loglik(*args) == pytest.approx(_pure.seir_loglik(*args), rel=1e-9, abs=1e-7)
    np.testing.assert_allclose(
        _core.seir_loglik_pointwise(*args), _pure.seir_loglik_pointwise(*args), rtol=1e-9, atol=1e-7
    )


@needs_core
def test_negative_detection_parity():
    istar = np.array([3, 0, 0], dtype=np.int64)
    rstar = np.array([0, 5, 0], dtype=np.int64)
    res_p = _pure.sir_path(9, 1, 0, istar, rstar)
    res_c = _core.sir_path(9, 1, 0, istar, rstar)
    assert res_p[3] == res_c[3] == 2
    assert res_p[4] == res_c[4] == "i"


@needs_core
def test_impossible_draw_is_minus_inf_both():
    # rstar exceeds the infectious pool while the path stays nonnegative
    istar = np.array([2, 0], dtype=np.int64)
    rstar = np.array([2, 1], dtype=np.int64)
    s, i, r, bad, _ = _pure.sir_path(9, 1, 0, istar, rstar)
    assert bad == -1
    beta_t = np.full(2, 0.5)
    assert _pure.sir_loglik(s, i, istar, rstar, beta_t, 0.3, 10) == -np.inf
    assert _core.sir_loglik(s, i, istar, rstar, beta_t, 0.3, 10) == -np.inf


def test_env_override_selects_pure(monkeypatch):
    import importlib
    import subprocess
    import sys

    code = (
        "import os; os.environ['EPIALARM_PURE']='1'; "
        "import epialarm; print(epialarm.kernel_impl)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "pure"
    del importlib, monkeypatch
