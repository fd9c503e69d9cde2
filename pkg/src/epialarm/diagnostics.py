"""Model comparison, reproductive numbers, posterior summaries, forecasting.

The WAIC pointwise unit is one day: each day's entry is the sum of that
day's transition log-pmfs, with imputed latent values integrated over by
the posterior draws.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .chain import CompartmentPath, Population, _forward
from .mcmc import Parameterization, PosteriorSamples
from .model import FitData, ModelSpec


@dataclass
class WaicResult:
    """Widely applicable information criterion; lower is better."""

    waic: float
    lppd: float
    p_waic: float
    lppd_i: np.ndarray
    p_waic_i: np.ndarray


def waic(pointwise_loglik: np.ndarray) -> WaicResult:
    """WAIC from a (draws, days) pointwise log-likelihood matrix.

    lppd_i = log mean_draw exp(ll_i) computed stably; p_waic_i is the
    between-draw sample variance. waic = -2 (lppd - p_waic).
    """
    ll = np.asarray(pointwise_loglik, dtype=np.float64)
    if ll.ndim != 2 or ll.shape[0] < 2:
        raise ValueError("need a (draws, days) matrix with at least 2 draws")
    if not np.all(np.isfinite(ll)):
        raise ValueError("pointwise log-likelihood entries must be finite")
    n_draws = ll.shape[0]
    degenerate = np.array([np.unique(ll[:, j]).size < 2 for j in range(ll.shape[1])])
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} day(s) have fewer than 2 distinct log-likelihood "
            "values; p_waic contributions there are degenerate",
            RuntimeWarning,
            stacklevel=2,
        )
    lppd_i = logsumexp(ll, axis=0) - np.log(n_draws)
    p_waic_i = np.var(ll, axis=0, ddof=1)
    lppd = float(np.sum(lppd_i))
    p_waic = float(np.sum(p_waic_i))
    return WaicResult(
        waic=-2.0 * (lppd - p_waic),
        lppd=lppd,
        p_waic=p_waic,
        lppd_i=lppd_i,
        p_waic_i=p_waic_i,
    )


def r0_effective(path: CompartmentPath, beta_series, gamma: float, tail: str = "hold") -> np.ndarray:
    """Per-day effective reproductive number.

    R0(t) = S_t sum_{k >= t} [1 - exp(-beta_k / N)] exp(-gamma)^(k - t).
    ``tail='hold'`` holds beta at its last value beyond the series and
    closes the remaining geometric sum analytically; ``tail='truncate'``
    stops the sum at the end of the series.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive for the tail sum to converge")
    if tail not in ("hold", "truncate"):
        raise ValueError("tail must be 'hold' or 'truncate'")
    beta_series = np.asarray(beta_series, dtype=np.float64)
    tau = beta_series.size
    n = float(path.n)
    s = np.asarray(path.s[:tau], dtype=np.float64)
    p = -np.expm1(-beta_series / n)
    decay = np.exp(-gamma)
    # backward recursion: G_t = p_t + decay * G_{t+1}
    tail_val = p[-1] * decay / (1.0 - decay) if tail == "hold" else 0.0
    g = np.empty(tau, dtype=np.float64)
    acc = tail_val
    for t in range(tau - 1, -1, -1):
        acc = p[t] + decay * acc
        g[t] = acc
    return s * g


@dataclass
class ParameterSummary:
    name: str
    mean: float
    intervals: dict  # level -> (lower, upper)


def summarize(samples: PosteriorSamples, levels=(0.95,)) -> dict[str, ParameterSummary]:
    """Posterior means and equal-tailed credible intervals.

    Quantiles use linear interpolation of order statistics (numpy's
    default), so summaries are deterministic given the draws.
    """
    stacked = samples.stacked()
    if stacked.shape[0] == 0:
        raise ValueError("no retained draws to summarize")
    out = {}
    for idx, name in enumerate(samples.names):
        col = stacked[:, idx]
        intervals = {}
        for level in levels:
            alpha = (1.0 - level) / 2.0
            lo, hi = np.quantile(col, [alpha, 1.0 - alpha])
            intervals[level] = (float(lo), float(hi))
        out[name] = ParameterSummary(name=name, mean=float(col.mean()), intervals=intervals)
    return out


# ---------------------------------------------------------------------------
# Posterior-predictive forecasting


@dataclass
class ForecastState:
    """Model state at the forecast origin.

    ``history`` is the observed incidence that informed the alarm during
    fitting (days 1..day); ``compartments`` holds s/e/i/r at the end of
    that window, either shared (shape (4,)) or per retained draw
    (shape (draws, 4)).
    """

    pop: Population
    day: int
    history: np.ndarray
    compartments: np.ndarray

    def __post_init__(self):
        self.history = np.asarray(self.history, dtype=np.int64)
        self.compartments = np.asarray(self.compartments, dtype=np.int64)
        if self.history.size != self.day:
            raise ValueError("history must cover days 1..day")


def forecast_state(samples: PosteriorSamples, data: FitData) -> ForecastState:
    """Forecast origin built from a fit's retained terminal states."""
    return ForecastState(
        pop=data.pop,
        day=data.tau,
        history=data.alarm_input,
        compartments=samples.stacked_terminal().astype(np.int64),
    )


@dataclass
class ForecastEnsemble:
    """Per-draw forecast incidence and per-day summaries."""

    incidence: np.ndarray  # (draws, horizon)
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    obs_fraction: float
    level: float = 0.95


_VEC_NAME = re.compile(r"^(.*)\[(\d+)\]$")


def unflatten(names: list[str], row: np.ndarray) -> dict:
    """Rebuild a parameter dict from flattened draw columns."""
    params: dict = {}
    sizes: dict = {}
    for name, value in zip(names, row):
        m = _VEC_NAME.match(name)
        if m:
            base, idx = m.group(1), int(m.group(2))
            sizes[base] = max(sizes.get(base, 0), idx + 1)
            params.setdefault(base, {})[idx] = float(value)
        else:
            params[name] = float(value)
    for base, size in sizes.items():
        vec = np.empty(size)
        for idx, val in params[base].items():
            vec[idx] = val
        params[base] = vec
    return params


def forecast(
    samples: PosteriorSamples,
    model: ModelSpec,
    state_at_T: ForecastState,
    horizon: int,
    obs_fraction: float = 1.0,
    rng: np.random.Generator | None = None,
    level: float = 0.95,
    max_draws: int | None = None,
    fixed: dict | None = None,
) -> ForecastEnsemble:
    """Simulate each retained draw forward from the forecast origin.

    Compartment dynamics use all simulated cases; the alarm input sees
    each new case independently with probability ``obs_fraction``
    (partial-observation correction). Draw-level simulations use spawned
    generator streams, so results are reproducible from ``rng`` alone.
    """
    if not 0.0 < obs_fraction <= 1.0:
        raise ValueError("obs_fraction must lie in (0, 1]")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = np.random.default_rng() if rng is None else rng

    ctx = Parameterization(
        model,
        FitData(pop=state_at_T.pop, istar=state_at_T.history),
        fixed=fixed,
    )
    draws = samples.stacked()
    comps = state_at_T.compartments
    if comps.ndim == 1:
        comps = np.broadcast_to(comps, (draws.shape[0], 4))
    if comps.shape[0] != draws.shape[0]:
        raise ValueError("per-draw compartments must match the number of draws")
    n_draws = draws.shape[0]
    if max_draws is not None and n_draws > max_draws:
        keep = np.linspace(0, n_draws - 1, max_draws).astype(int)
    else:
        keep = np.arange(n_draws)

    streams = rng.spawn(keep.size)
    incidence = np.empty((keep.size, horizon), dtype=np.int64)
    for out_row, (d, sub_rng) in enumerate(zip(keep, streams)):
        params = unflatten(samples.names, draws[d])
        rates = ctx.rates(params)
        formulation = ctx.formulation(params)
        s, e, i, _ = (int(v) for v in comps[d])
        ts, _ = _forward(
            s=s,
            e=e,
            i=i,
            n=state_at_T.pop.n,
            rates=rates,
            formulation=formulation,
            horizon=horizon,
            rng=sub_rng,
            history=state_at_T.history,
            obs_fraction=obs_fraction,
            start_day=state_at_T.day + 1,
        )
        incidence[out_row] = ts.istar

    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(incidence, [alpha, 1.0 - alpha], axis=0)
    return ForecastEnsemble(
        incidence=incidence,
        mean=incidence.mean(axis=0),
        lower=lower,
        upper=upper,
        obs_fraction=obs_fraction,
        level=level,
    )
