"""Data-augmented adaptive Metropolis-Hastings for the chain-binomial models.

Parameters are updated in blocks by random walks on transformed scales
(log for positive parameters, logit for interval-bounded ones, identity
for unconstrained ones) with Robbins-Monro scale adaptation during burn-in
only. Latent transition entries are updated by adjacent-day event shifts
and binomial pool redraws. The Gaussian-process alarm uses a whitened
parameterization: the chain moves standard-normal coordinates that are
mapped through the covariance Cholesky factor.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logit

from . import gp
from .alarms import (
    ConstraintViolation,
    GaussianProcessAlarm,
    HillAlarm,
    PowerAlarm,
    SplineAlarm,
    ThresholdAlarm,
    smoothed_series,
)
from .chain import (
    AlarmDriven,
    Constant,
    FlexibleBetaT,
    Intervention,
    Population,
    RateParams,
    TransitionSeries,
    beta_series,
    build_path,
    exit_prob,
    transmission_prob,
)
from . import _kernels as _K
from .likelihood import ZERO_LOGLIK, is_zero, pointwise_log_likelihood
from .model import FitData, ModelSpec
from .priors import PriorSpec, log_prior as prior_logdensity

WORKERS_ENV = "EPIALARM_WORKERS"

TARGET_SCALAR = 0.44
TARGET_VECTOR = 0.234


# ---------------------------------------------------------------------------
# Transforms


class Log:
    def to_z(self, x):
        return np.log(x)

    def from_z(self, z):
        return np.exp(z)

    def log_jac(self, z) -> float:
        return float(np.sum(z))


@dataclass(frozen=True)
class LogitInterval:
    lo: float
    hi: float

    def to_z(self, x):
        return logit((np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo))

    def from_z(self, z):
        return self.lo + (self.hi - self.lo) * expit(z)

    def log_jac(self, z) -> float:
        z = np.asarray(z, dtype=np.float64)
        # log[(hi-lo) p (1-p)] with p = expit(z), written stably
        return float(np.sum(np.log(self.hi - self.lo) - np.logaddexp(0.0, z) - np.logaddexp(0.0, -z)))


class Identity:
    def to_z(self, x):
        return np.asarray(x, dtype=np.float64)

    def from_z(self, z):
        return z

    def log_jac(self, z) -> float:
        return 0.0


@dataclass
class Block:
    """A jointly-updated group of parameters."""

    name: str
    params: tuple[str, ...]
    transforms: dict
    kind: str = "rw"  # "rw" (continuous random walk) | "int" (integer walk)


# ---------------------------------------------------------------------------
# Configuration and state


@dataclass
class MCMCConfig:
    """Chain layout and adaptation settings (paper-scale defaults)."""

    chains: int = 3
    burnin: int = 30_000
    iterations: int = 300_000
    thin: int = 10
    seed: int = 0
    initial_scale: float = 0.5
    augmentation_moves: float = 1.0  # multiplier on latent-update move counts
    audit_every: int = 1000

    def __post_init__(self):
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.iterations < 0 or self.burnin < 0:
            raise ValueError("iteration counts must be nonnegative")


@dataclass
class ChainState:
    """Current parameter values, augmented data, and cached densities."""

    params: dict
    ts: TransitionSeries
    loglik: object  # float or ZERO_LOGLIK
    logprior: float
    scales: dict = field(default_factory=dict)
    adapting: bool = True
    adapt_steps: dict = field(default_factory=dict)
    accepted: dict = field(default_factory=dict)
    proposed: dict = field(default_factory=dict)


class AuditError(RuntimeError):
    """Cached log density drifted from a from-scratch recomputation."""


# ---------------------------------------------------------------------------
# Model wiring


class Parameterization:
    """Binds a ModelSpec and FitData into sampler machinery."""

    def __init__(self, model: ModelSpec, data: FitData, fixed: dict | None = None):
        self.model = model
        self.data = data
        self.fixed = dict(fixed or {})
        self.seir = model.seir
        if self.seir and data.pop.e0 + data.pop.i0 == 0:
            raise ValueError("SEIR fit needs initial exposed or infectious individuals")

        tau = data.tau
        if model.transmission == "alarm":
            x = smoothed_series(data.alarm_input, model.smoothing, tau)
            self.x_obs = x
            self.x_min = float(np.min(x))
            self.x_max = float(np.max(x))
            if self.x_max <= self.x_min:
                raise ValueError("alarm input is constant; alarm models unidentifiable")
        else:
            self.x_obs = None
            self.x_min, self.x_max = 0.0, 0.0
        self.priors: PriorSpec = model.priors.resolved(self.x_min, self.x_max)
        if model.transmission == "alarm" and model.alarm_family == "gp":
            self.gp_grid = gp.latent_grid(self.x_max, model.gp_grid_size)
        else:
            self.gp_grid = None
        if model.transmission == "flexible":
            interior = np.quantile(np.arange(1.0, tau + 1.0), np.linspace(0, 1, model.betat_knots + 2))
            self.betat_knots = np.unique(interior)
        else:
            self.betat_knots = None
        self._chol_key = None
        self._chol_val = None
        self.blocks = self._build_blocks()

    # -- block layout

    def _build_blocks(self) -> list[Block]:
        model, priors = self.model, self.priors
        blocks: list[Block] = []

        def add(name, spec, kind="rw"):
            params = tuple(p for p, _ in spec if p not in self.fixed)
            if params:
                blocks.append(
                    Block(name, params, {p: t for p, t in spec if p not in self.fixed}, kind)
                )

        rates = []
        if model.transmission in ("constant", "alarm"):
            rates.append(("beta", Log()))
        rates.append(("gamma", Log()))
        if self.seir:
            rates.append(("lam", Log()))
        add("rates", rates)

        if model.transmission == "alarm":
            family = model.alarm_family
            if family == "power":
                add("alarm", [("k", Log())])
            elif family == "threshold":
                add(
                    "alarm",
                    [("delta", LogitInterval(0.0, 1.0)), ("h", LogitInterval(self.x_min, self.x_max))],
                )
            elif family == "hill":
                add(
                    "alarm",
                    [
                        ("delta", LogitInterval(0.0, 1.0)),
                        ("x0", LogitInterval(max(self.x_min, 1e-12), self.x_max)),
                        ("nu", Log()),
                    ],
                )
            elif family == "spline":
                add("spline_coef", [("coef", Identity())])
                add("knots", [("knots", LogitInterval(max(self.x_min, 0.0), self.x_max))])
            elif family == "gp":
                add("gp_latent", [("gp_z", Identity())])
                add("gp_hyper", [("gp_sigma", Log()), ("gp_ell", Log())])
        elif model.transmission == "flexible":
            add("betat", [("betat_coef", Identity())])
        elif model.transmission == "intervention":
            add("intervention", [("beta1", Identity()), ("beta2", Identity())])

        if model.estimate_initial_conditions:
            if self.priors.s0 is None or self.priors.i0 is None:
                raise ValueError("estimating initial conditions needs s0/i0 priors")
            add("initial", [("s0", Identity()), ("i0", Identity())], kind="int")
        return blocks

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    # -- parameter plumbing

    def initial_params(self, rng: np.random.Generator) -> dict:
        """Dispersed but sane starting values (one draw per chain)."""
        model = self.model
        p: dict = {}

        def jitter(base, spread):
            return float(base * math.exp(spread * rng.normal()))

        if model.transmission in ("constant", "alarm"):
            p["beta"] = jitter(0.5, 0.4)
        p["gamma"] = jitter(0.25, 0.3)
        if self.seir:
            p["lam"] = jitter(0.25, 0.3)
        if model.transmission == "alarm":
            family = model.alarm_family
            if family == "power":
                p["k"] = float(np.exp(rng.uniform(np.log(0.005), np.log(2.0))))
            elif family == "threshold":
                p["delta"] = float(rng.uniform(0.3, 0.9))
                p["h"] = float(rng.uniform(*self._inner_range()))
            elif family == "hill":
                p["delta"] = float(rng.uniform(0.3, 0.9))
                p["x0"] = float(rng.uniform(*self._inner_range()))
                p["nu"] = jitter(1.5, 0.4)
            elif family == "spline":
                p["coef"] = rng.normal(0.0, 0.01, size=model.alarm_knots + 2)
                lo, hi = self._inner_range()
                p["knots"] = np.sort(rng.uniform(lo, hi, size=model.alarm_knots))
            elif family == "gp":
                p["gp_z"] = rng.normal(0.0, 0.1, size=self.gp_grid.size)
                p["gp_sigma"] = jitter(3.0, 0.1)
                p["gp_ell"] = jitter(self.priors.gp_ell.mean, 0.2)
        elif model.transmission == "flexible":
            coef = np.zeros(self.betat_knots.size)
            coef[0] = math.log(jitter(0.5, 0.3))
            p["betat_coef"] = coef
        elif model.transmission == "intervention":
            p["beta1"] = math.log(jitter(0.5, 0.3))
            p["beta2"] = float(rng.normal(-0.05, 0.02))
        if model.estimate_initial_conditions:
            p["s0"] = int(self.data.pop.s0)
            p["i0"] = int(self.data.pop.i0)
        for name in self.fixed:
            p.pop(name, None)
        return p

    def _inner_range(self):
        span = self.x_max - self.x_min
        return self.x_min + 0.1 * span, self.x_max - 0.1 * span

    def merged(self, params: dict) -> dict:
        return {**params, **self.fixed}

    def rates(self, params: dict) -> RateParams:
        full = self.merged(params)
        beta = full.get("beta", 1.0)
        return RateParams(
            beta=float(beta),
            gamma=float(full["gamma"]),
            lam=float(full["lam"]) if self.seir else None,
        )

    def population(self, params: dict) -> Population:
        base = self.data.pop
        if not self.model.estimate_initial_conditions:
            return base
        full = self.merged(params)
        s0 = int(full["s0"])
        i0 = int(full["i0"])
        r0 = base.n - s0 - base.e0 - i0
        return Population(n=base.n, s0=s0, i0=i0, e0=base.e0, r0=r0)

    def _gp_chol(self, sigma: float, ell: float) -> np.ndarray:
        key = (sigma, ell)
        if key != self._chol_key:
            self._chol_val = gp.covariance_cholesky(self.gp_grid, sigma, ell)
            self._chol_key = key
        return self._chol_val

    def formulation(self, params: dict):
        model = self.model
        full = self.merged(params)
        if model.transmission == "constant":
            return Constant()
        if model.transmission == "flexible":
            return FlexibleBetaT(knots=self.betat_knots, coef=full["betat_coef"])
        if model.transmission == "intervention":
            return Intervention(
                beta1=float(full["beta1"]),
                beta2=float(full["beta2"]),
                tstar=model.intervention_day,
            )
        family = model.alarm_family
        if family == "power":
            alarm = PowerAlarm(k=float(full["k"]), n=self.data.pop.n)
        elif family == "threshold":
            alarm = ThresholdAlarm(delta=float(full["delta"]), h=float(full["h"]))
        elif family == "hill":
            alarm = HillAlarm(delta=float(full["delta"]), x0=float(full["x0"]), nu=float(full["nu"]))
        elif family == "spline":
            alarm = SplineAlarm(knots=full["knots"], coef=full["coef"], x_max=self.x_max)
        elif family == "gp":
            sigma = float(full["gp_sigma"])
            ell = float(full["gp_ell"])
            chol = self._gp_chol(sigma, ell)
            latent = gp.anchored_mean(self.gp_grid, self.x_max) + chol @ full["gp_z"]
            alarm = GaussianProcessAlarm(grid=self.gp_grid, latent=latent, sigma=sigma, ell=ell)
        else:
            raise ValueError(f"unknown alarm family {family!r}")
        return AlarmDriven(alarm=alarm, smoothing=model.smoothing)

    def log_prior(self, params: dict) -> float:
        if self.model.estimate_initial_conditions:
            full = self.merged(params)
            base = self.data.pop
            s0, i0 = int(full["s0"]), int(full["i0"])
            if s0 < 0 or i0 < 0 or base.n - s0 - base.e0 - i0 < 0:
                return -math.inf
        theta = {k: v for k, v in params.items() if k not in self.fixed}
        return prior_logdensity(theta, self.priors)

    def betas_for(self, params: dict) -> np.ndarray:
        """Per-day transmission rates over the fit window.

        Equivalent to ``beta_series`` but reuses the precomputed smoothed
        alarm input; raises ConstraintViolation for invalid latent alarm
        curves (callers reject those proposals).
        """
        rates = self.rates(params)
        formulation = self.formulation(params)
        if isinstance(formulation, AlarmDriven):
            alarm = formulation.alarm
            a = np.asarray(alarm.evaluate(self.x_obs), dtype=np.float64)
            if isinstance(alarm, (SplineAlarm, GaussianProcessAlarm)):
                a = a.copy()
                a[0] = 0.0
            return rates.beta * (1.0 - a)
        from .chain import beta_series as _bs

        return _bs(formulation, rates, self.data.tau)

    def fast_loglik(self, pop: Population, rates: RateParams, beta_t: np.ndarray, ts: TransitionSeries):
        """Kernel-direct total log-likelihood for a fixed beta series."""
        if self.seir:
            s, e, i, _, bad, _ = _K.seir_path(
                pop.s0, pop.e0, pop.i0, pop.r0, ts.estar, ts.istar, ts.rstar
            )
            if bad >= 0:
                return ZERO_LOGLIK
            total = _K.seir_loglik(
                s, e, i, ts.estar, ts.istar, ts.rstar, beta_t, rates.lam, rates.gamma, float(pop.n)
            )
        else:
            s, i, _, bad, _ = _K.sir_path(pop.s0, pop.i0, pop.r0, ts.istar, ts.rstar)
            if bad >= 0:
                return ZERO_LOGLIK
            total = _K.sir_loglik(s, i, ts.istar, ts.rstar, beta_t, rates.gamma, float(pop.n))
        return total if math.isfinite(total) else ZERO_LOGLIK

    def loglik(self, params: dict, ts: TransitionSeries):
        try:
            pop = self.population(params)
        except ValueError:
            return ZERO_LOGLIK
        # GP covariance factorization failures (LinAlgError) propagate: the
        # chain aborts with diagnostics rather than silently rejecting
        try:
            beta_t = self.betas_for(params)
        except ConstraintViolation:
            return ZERO_LOGLIK
        return self.fast_loglik(pop, self.rates(params), beta_t, ts)

    def pointwise(self, params: dict, ts: TransitionSeries) -> np.ndarray:
        return pointwise_log_likelihood(
            ts,
            self.population(params),
            self.rates(params),
            self.formulation(params),
            alarm_input=self.data.alarm_input,
        )

    # -- latent-series helpers

    def latent_series_specs(self) -> list[tuple[str, np.ndarray]]:
        """(series name, observed-mask) pairs with any latent entries."""
        out = []
        if self.seir:
            out.append(("estar", np.zeros(self.data.tau, dtype=bool)))
        if not self.data.istar_mask.all():
            out.append(("istar", self.data.istar_mask))
        if not self.data.rstar_mask.all():
            out.append(("rstar", self.data.rstar_mask))
        return out

    def initial_transitions(self, params: dict, rng: np.random.Generator) -> TransitionSeries:
        """A feasible augmented series consistent with the observations."""
        data = self.data
        tau = data.tau
        istar = data.istar.copy()
        pop = self.population(params)
        rates = self.rates(params)
        if self.seir:
            if pop.e0 < istar[0]:
                raise ValueError(
                    "initial exposed count cannot cover day-1 incidence; "
                    "raise e0 or shift the modeling start"
                )
            estar = np.zeros(tau, dtype=np.int64)
            estar[:-1] = istar[1:]
        else:
            estar = None
        if data.rstar is not None:
            rstar = data.rstar.copy()
        else:
            # sequential feasible draw from the removal pools
            rstar = np.zeros(tau, dtype=np.int64)
            pi_ir = exit_prob(rates.gamma)
            i_t = pop.i0
            for t in range(tau):
                rstar[t] = rng.binomial(i_t, pi_ir)
                i_t += int(istar[t]) - int(rstar[t])
        return TransitionSeries(istar=istar, rstar=rstar, estar=estar)


# ---------------------------------------------------------------------------
# Sampler


def _as_float(value):
    return 0.0 if is_zero(value) else float(value)


class Sampler:
    """Metropolis-within-Gibbs driver for one model and dataset."""

    def __init__(
        self,
        parameterization: Parameterization,
        config: MCMCConfig,
        prior_only: bool = False,
    ):
        self.ctx = parameterization
        self.config = config
        self.prior_only = prior_only

    # -- state construction

    def initial_state(self, rng: np.random.Generator) -> ChainState:
        ctx = self.ctx
        for _ in range(100):
            params = ctx.initial_params(rng)
            lp = ctx.log_prior(params)
            if lp == -math.inf:
                continue
            ts = ctx.initial_transitions(params, rng)
            ll = 0.0 if self.prior_only else ctx.loglik(params, ts)
            if not is_zero(ll):
                break
        else:
            raise RuntimeError("could not find a feasible starting state")
        scales = {}
        for block in ctx.blocks:
            dim = _block_dim(block, params)
            scales[block.name] = self.config.initial_scale / math.sqrt(dim)
        state = ChainState(params=params, ts=ts, loglik=ll, logprior=lp, scales=scales)
        state.scales["impute_shift"] = 1.0
        return state

    # -- accounting helpers

    def _tally(self, state: ChainState, name: str, accepted: bool):
        state.proposed[name] = state.proposed.get(name, 0) + 1
        if accepted:
            state.accepted[name] = state.accepted.get(name, 0) + 1

    def _adapt(self, state: ChainState, name: str, alpha: float, target: float):
        if not state.adapting:
            return
        k = state.adapt_steps.get(name, 0) + 1
        state.adapt_steps[name] = k
        eta = k ** -0.6
        log_scale = math.log(state.scales[name]) + eta * (alpha - target)
        state.scales[name] = float(np.clip(math.exp(log_scale), 1e-6, 1e4))

    # -- parameter moves

    def update_parameter_block(self, state: ChainState, block, rng: np.random.Generator) -> ChainState:
        """One Metropolis-Hastings step on the named block."""
        if isinstance(block, str):
            block = self.ctx.block(block)
        if block.kind == "int":
            return self._update_integer_block(state, block, rng)

        scale = state.scales[block.name]
        z_parts, sizes = [], []
        for p in block.params:
            z = np.atleast_1d(block.transforms[p].to_z(state.params[p]))
            z_parts.append(z)
            sizes.append(z.size)
        z_old = np.concatenate(z_parts)
        z_new = z_old + scale * rng.standard_normal(z_old.size)

        params_new = dict(state.params)
        jac_old = jac_new = 0.0
        offset = 0
        for p, size in zip(block.params, sizes):
            tr = block.transforms[p]
            zo = z_old[offset : offset + size]
            zn = z_new[offset : offset + size]
            if size > 1:
                params_new[p] = np.array(tr.from_z(zn), dtype=np.float64)
            else:
                params_new[p] = float(tr.from_z(zn[0]))
            jac_old += tr.log_jac(zo)
            jac_new += tr.log_jac(zn)
            offset += size

        target = TARGET_SCALAR if z_old.size == 1 else TARGET_VECTOR
        lp_new = self.ctx.log_prior(params_new)
        if lp_new == -math.inf:
            self._tally(state, block.name, False)
            self._adapt(state, block.name, 0.0, target)
            return state
        ll_new = 0.0 if self.prior_only else self.ctx.loglik(params_new, state.ts)
        if is_zero(ll_new):
            self._tally(state, block.name, False)
            self._adapt(state, block.name, 0.0, target)
            return state

        delta = (float(ll_new) + lp_new + jac_new) - (
            _as_float(state.loglik) + state.logprior + jac_old
        )
        alpha = math.exp(min(delta, 0.0))
        accept = math.log(rng.uniform()) < delta
        if accept:
            state.params = params_new
            state.loglik = ll_new
            state.logprior = lp_new
        self._tally(state, block.name, accept)
        self._adapt(state, block.name, alpha, target)
        return state

    def _update_integer_block(self, state: ChainState, block: Block, rng) -> ChainState:
        scale = state.scales[block.name]
        params_new = dict(state.params)
        moved = False
        for p in block.params:
            step = int(round(rng.normal(0.0, scale)))
            params_new[p] = int(state.params[p]) + step
            moved = moved or step != 0
        target = TARGET_SCALAR if len(block.params) == 1 else TARGET_VECTOR
        if not moved:
            self._tally(state, block.name, True)
            self._adapt(state, block.name, 1.0, target)
            return state
        lp_new = self.ctx.log_prior(params_new)
        if lp_new == -math.inf:
            self._tally(state, block.name, False)
            self._adapt(state, block.name, 0.0, target)
            return state
        ll_new = 0.0 if self.prior_only else self.ctx.loglik(params_new, state.ts)
        if is_zero(ll_new):
            self._tally(state, block.name, False)
            self._adapt(state, block.name, 0.0, target)
            return state
        delta = (float(ll_new) + lp_new) - (_as_float(state.loglik) + state.logprior)
        alpha = math.exp(min(delta, 0.0))
        accept = math.log(rng.uniform()) < delta
        if accept:
            state.params = params_new
            state.loglik = ll_new
            state.logprior = lp_new
        self._tally(state, block.name, accept)
        self._adapt(state, block.name, alpha, target)
        return state

    # -- latent-data moves

    def impute_transitions(self, state: ChainState, rng: np.random.Generator) -> ChainState:
        """One sweep of shift and pool moves over all latent entries."""
        if self.prior_only:
            return state
        specs = self.ctx.latent_series_specs()
        if not specs:
            return state
        ctx = self.ctx
        pop = ctx.population(state.params)
        rates = ctx.rates(state.params)
        beta_t = ctx.betas_for(state.params)  # params fixed during the sweep
        for name, mask in specs:
            latent = np.flatnonzero(~mask)
            if latent.size == 0:
                continue
            n_shift = max(1, int(round(latent.size * self.config.augmentation_moves)))
            n_pool = max(1, int(math.ceil(latent.size / 4 * self.config.augmentation_moves)))
            self._shift_moves(state, pop, rates, beta_t, name, mask, latent, n_shift, rng)
            self._pool_moves(state, pop, rates, beta_t, name, latent, n_pool, rng)
        return state

    def _shift_moves(self, state, pop, rates, beta_t, name, mask, latent, count, rng):
        arr = getattr(state.ts, name)
        tau = arr.size
        fast = self.ctx.fast_loglik
        js = latent[rng.integers(latent.size, size=count)]
        dirs = 2 * rng.integers(2, size=count) - 1
        log_us = np.log1p(-rng.uniform(size=count))  # log U with U in (0, 1]
        accepted = proposed = 0
        for m in range(count):
            j = int(js[m])
            partner = j + int(dirs[m])
            proposed += 1
            if not (0 <= partner < tau) or mask[partner] or arr[j] == 0:
                continue
            arr[j] -= 1
            arr[partner] += 1
            ll_new = fast(pop, rates, beta_t, state.ts)
            if not is_zero(ll_new) and log_us[m] < ll_new - _as_float(state.loglik):
                state.loglik = ll_new
                accepted += 1
            else:
                arr[j] += 1
                arr[partner] -= 1
        state.proposed["impute_shift"] = state.proposed.get("impute_shift", 0) + proposed
        state.accepted["impute_shift"] = state.accepted.get("impute_shift", 0) + accepted

    def _pool_moves(self, state, pop, rates, beta_t, name, latent, count, rng):
        ctx = self.ctx
        arr = getattr(state.ts, name)
        ts = state.ts
        fast = ctx.fast_loglik
        pi_ir = exit_prob(rates.gamma)
        pi_ei = exit_prob(rates.lam) if self.ctx.seir else None
        js = latent[rng.integers(latent.size, size=count)]
        log_us = np.log1p(-rng.uniform(size=count))
        accepted = proposed = 0
        for m in range(count):
            j = int(js[m])
            proposed += 1
            if ctx.seir:
                s, e, i, _, bad, _ = _K.seir_path(pop.s0, pop.e0, pop.i0, pop.r0, ts.estar, ts.istar, ts.rstar)
            else:
                s, i, _, bad, _ = _K.sir_path(pop.s0, pop.i0, pop.r0, ts.istar, ts.rstar)
            if name == "rstar":
                pool = int(i[j])
                prob = pi_ir
            elif name == "istar":
                pool = int(e[j])
                prob = pi_ei
            else:  # estar: pool S_t, per-day infection probability
                pool = int(s[j])
                prob = transmission_prob(beta_t[j], int(i[j]), pop.n)
            old = int(arr[j])
            new = int(rng.binomial(pool, prob))
            if new == old:
                accepted += 1
                continue
            arr[j] = new
            ll_new = fast(pop, rates, beta_t, ts)
            if is_zero(ll_new):
                accept = False
            else:
                logq = _binom_logpmf(pool, prob, old) - _binom_logpmf(pool, prob, new)
                accept = log_us[m] < ll_new - _as_float(state.loglik) + logq
            if accept:
                state.loglik = ll_new
                accepted += 1
            else:
                arr[j] = old
        state.proposed["impute_pool"] = state.proposed.get("impute_pool", 0) + proposed
        state.accepted["impute_pool"] = state.accepted.get("impute_pool", 0) + accepted

    # -- audits

    def audit(self, state: ChainState):
        lp = self.ctx.log_prior(state.params)
        ll = 0.0 if self.prior_only else self.ctx.loglik(state.params, state.ts)
        if is_zero(ll) != is_zero(state.loglik):
            raise AuditError("zero-likelihood flag drifted")
        if abs(lp - state.logprior) > 1e-8 or abs(_as_float(ll) - _as_float(state.loglik)) > 1e-8:
            raise AuditError(
                f"cached densities drifted: loglik {state.loglik} vs {ll}, "
                f"logprior {state.logprior} vs {lp}"
            )

    # -- full kernel

    def sweep(self, state: ChainState, rng: np.random.Generator) -> ChainState:
        for block in self.ctx.blocks:
            state = self.update_parameter_block(state, block, rng)
        return self.impute_transitions(state, rng)


def _block_dim(block: Block, params: dict) -> int:
    return sum(np.size(params[p]) for p in block.params)


def _binom_logpmf(n: int, p: float, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    if p <= 0.0:
        return 0.0 if k == 0 else -math.inf
    if p >= 1.0:
        return 0.0 if k == n else -math.inf
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


# ---------------------------------------------------------------------------
# Posterior container and chain orchestration


@dataclass
class PosteriorSamples:
    """Retained draws, pointwise log-likelihoods, and bookkeeping."""

    names: list[str]
    chains: list[np.ndarray]        # per chain: (draws, n_params)
    pointwise: list[np.ndarray]     # per chain: (draws, tau)
    terminal: list[np.ndarray]      # per chain: (draws, 4) s/e/i/r at tau
    logdens: list[np.ndarray]       # per chain: (draws, 2) loglik, logprior
    accept_rates: list[dict]
    final_scales: list[dict]

    @property
    def n_chains(self) -> int:
        return len(self.chains)

    @property
    def n_draws(self) -> int:
        return sum(c.shape[0] for c in self.chains)

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.chains, axis=0) if self.chains else np.empty((0, len(self.names)))

    def stacked_pointwise(self) -> np.ndarray:
        return np.concatenate(self.pointwise, axis=0)

    def stacked_terminal(self) -> np.ndarray:
        return np.concatenate(self.terminal, axis=0)

    def column(self, name: str) -> np.ndarray:
        return self.stacked()[:, self.names.index(name)]


def flatten_names(params: dict, order: list[str]) -> list[str]:
    names = []
    for key in order:
        value = params[key]
        if np.size(value) == 1:
            names.append(key)
        else:
            names.extend(f"{key}[{i}]" for i in range(np.size(value)))
    return names


def flatten_values(params: dict, order: list[str]) -> np.ndarray:
    parts = []
    for key in order:
        parts.append(np.atleast_1d(np.asarray(params[key], dtype=np.float64)))
    return np.concatenate(parts) if parts else np.empty(0)


def _param_order(ctx: Parameterization) -> list[str]:
    order = []
    for block in ctx.blocks:
        order.extend(block.params)
    return order


def _run_single_chain(model, data, config, chain_index, prior_only, fixed):
    ctx = Parameterization(model, data, fixed=fixed)
    sampler = Sampler(ctx, config, prior_only=prior_only)
    seed_seq = np.random.SeedSequence(config.seed).spawn(config.chains)[chain_index]
    rng = np.random.default_rng(seed_seq)
    state = sampler.initial_state(rng)
    order = _param_order(ctx)

    state.adapting = True
    for it in range(config.burnin):
        sampler.sweep(state, rng)
        if config.audit_every and (it + 1) % config.audit_every == 0:
            sampler.audit(state)
    state.adapting = False

    n_out = config.iterations // config.thin
    draws = np.empty((n_out, len(flatten_names(state.params, order))))
    pointwise = np.empty((n_out, data.tau))
    terminal = np.empty((n_out, 4))
    logdens = np.empty((n_out, 2))
    row = 0
    for it in range(config.iterations):
        sampler.sweep(state, rng)
        if config.audit_every and (it + 1) % config.audit_every == 0:
            sampler.audit(state)
        if (it + 1) % config.thin == 0 and row < n_out:
            draws[row] = flatten_values(state.params, order)
            if prior_only:
                pointwise[row] = 0.0
                terminal[row] = 0.0
            else:
                pointwise[row] = ctx.pointwise(state.params, state.ts)
                path = build_path(ctx.population(state.params), state.ts)
                terminal[row] = (path.s[-1], path.e[-1], path.i[-1], path.r[-1])
            logdens[row] = (_as_float(state.loglik), state.logprior)
            row += 1

    accept = {
        key: state.accepted.get(key, 0) / max(state.proposed.get(key, 1), 1)
        for key in state.proposed
    }
    names = flatten_names(state.params, order)
    return names, draws[:row], pointwise[:row], terminal[:row], logdens[:row], accept, dict(state.scales)


def run_chain(
    model: ModelSpec,
    data: FitData,
    priors: PriorSpec | None = None,
    config: MCMCConfig | None = None,
    prior_only: bool = False,
    fixed: dict | None = None,
) -> PosteriorSamples:
    """Run the configured number of chains and collect retained draws.

    Fully reproducible from ``config.seed``; chains use independent spawned
    seed streams, so results do not depend on the worker count set via the
    EPIALARM_WORKERS environment variable.
    """
    config = config or MCMCConfig()
    if priors is not None:
        model = replace(model, priors=priors)
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    args = [(model, data, config, c, prior_only, fixed) for c in range(config.chains)]
    if workers > 1 and config.chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, config.chains)) as pool:
            results = list(pool.map(_run_single_chain_star, args))
    else:
        results = [_run_single_chain(*a) for a in args]

    names = results[0][0]
    return PosteriorSamples(
        names=list(names),
        chains=[r[1] for r in results],
        pointwise=[r[2] for r in results],
        terminal=[r[3] for r in results],
        logdens=[r[4] for r in results],
        accept_rates=[r[5] for r in results],
        final_scales=[r[6] for r in results],
    )


def _run_single_chain_star(args):
    return _run_single_chain(*args)


# ---------------------------------------------------------------------------
# Convergence diagnostic


def gelman_rubin(samples: PosteriorSamples) -> dict[str, float]:
    """Potential scale reduction factor per scalar parameter.

    Uses the between/within variance form
    R = sqrt(((n-1)/n W + B/n) / W). Requires >= 2 chains with >= 10
    retained draws each; raises if a parameter is constant across all
    chains (undefined variance).
    """
    if samples.n_chains < 2:
        raise ValueError("need at least 2 chains")
    n = min(c.shape[0] for c in samples.chains)
    if n < 10:
        raise ValueError("need at least 10 retained draws per chain")
    out = {}
    for idx, name in enumerate(samples.names):
        cols = np.stack([c[:n, idx] for c in samples.chains])  # (m, n)
        if np.all(cols == cols[0, 0]):
            raise ValueError(f"parameter {name!r} is constant across all chains")
        w = float(np.mean(np.var(cols, axis=1, ddof=1)))
        b_over_n = float(np.var(np.mean(cols, axis=1), ddof=1))
        if w == 0.0:
            out[name] = math.inf
            continue
        var_hat = (n - 1) / n * w + b_over_n
        out[name] = math.sqrt(var_hat / w)
    return out
