"""Batch command-line front end.

Four verbs read the same YAML config document: ``simulate`` draws
epidemics from a fully specified model, ``fit`` runs the MCMC for every
model in the menu, ``compare`` fits and writes the WAIC table, and
``forecast`` extends fitted models beyond the data window. Artifacts are
CSV files plus a plain-text run report.

Per-model seeds are ``seed + model index`` in menu order; chains within a
model use spawned streams of that seed. EPIALARM_WORKERS sets the chain
worker count.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from .alarms import (
    GaussianProcessAlarm,
    HillAlarm,
    PowerAlarm,
    SmoothingRule,
    SplineAlarm,
    ThresholdAlarm,
)
from .chain import (
    AlarmDriven,
    Constant,
    FlexibleBetaT,
    Intervention,
    Population,
    RateParams,
    simulate as simulate_chain,
)
from .data import ingest_csv, presmooth
from .diagnostics import forecast, forecast_state, r0_effective, summarize, waic
from .mcmc import MCMCConfig, gelman_rubin, run_chain
from .model import FitData, ModelSpec
from .priors import (
    GammaPrior,
    InverseGammaPrior,
    NormalPrior,
    PriorSpec,
    UniformPrior,
)
from .storage import load_samples, save_forecast, save_samples, save_waic_table

GR_THRESHOLD = 1.1


# ---------------------------------------------------------------------------
# Config parsing


@dataclass
class ModelEntry:
    spec: ModelSpec
    fixed: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    seed: int
    output_dir: str
    mcmc: MCMCConfig
    models: list[ModelEntry]
    data: dict | None = None
    forecast: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)


_PRIOR_KINDS = {
    "gamma": lambda d: GammaPrior(float(d["shape"]), float(d["rate"])),
    "uniform": lambda d: UniformPrior(float(d["low"]), float(d["high"])),
    "normal": lambda d: NormalPrior(float(d["mean"]), float(d["sd"])),
    "invgamma": lambda d: InverseGammaPrior(float(d["shape"]), float(d["scale"])),
}


def _parse_prior(entry: dict):
    kind = entry.get("dist")
    if kind not in _PRIOR_KINDS:
        raise ValueError(f"unknown prior dist {kind!r}; expected one of {sorted(_PRIOR_KINDS)}")
    return _PRIOR_KINDS[kind](entry)


def _parse_smoothing(entry) -> SmoothingRule:
    if entry is None:
        return SmoothingRule("moving_average", 1)
    return SmoothingRule(
        kind=str(entry.get("kind", "moving_average")),
        window=int(entry.get("window", 1)),
    )


def _parse_model(entry: dict) -> ModelEntry:
    priors = PriorSpec()
    overrides = {name: _parse_prior(spec) for name, spec in (entry.get("priors") or {}).items()}
    if overrides:
        from dataclasses import replace

        priors = replace(priors, **overrides)
    spec = ModelSpec(
        name=str(entry.get("name", "")),
        compartments=str(entry.get("compartments", "sir")),
        transmission=str(entry.get("transmission", "constant")),
        alarm_family=entry.get("alarm"),
        smoothing=_parse_smoothing(entry.get("smoothing")) if entry.get("smoothing") or entry.get("transmission") == "alarm" else None,
        intervention_day=entry.get("intervention_day"),
        alarm_knots=int(entry.get("alarm_knots", 3)),
        betat_knots=int(entry.get("betat_knots", 3)),
        gp_grid_size=int(entry.get("gp_grid_size", 50)),
        estimate_initial_conditions=bool(entry.get("estimate_initial_conditions", False)),
        priors=priors,
    )
    return ModelEntry(spec=spec, fixed=dict(entry.get("fixed") or {}))


def load_config(path: str, seed_override=None, out_override=None) -> RunConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if "seed" not in raw and seed_override is None:
        raise ValueError("config must set a seed (or pass --seed)")
    mcmc_raw = raw.get("mcmc") or {}
    seed = int(seed_override if seed_override is not None else raw["seed"])
    config = RunConfig(
        seed=seed,
        output_dir=str(out_override or raw.get("output_dir", "epialarm-out")),
        mcmc=MCMCConfig(
            chains=int(mcmc_raw.get("chains", 3)),
            burnin=int(mcmc_raw.get("burnin", 30_000)),
            iterations=int(mcmc_raw.get("iterations", 300_000)),
            thin=int(mcmc_raw.get("thin", 10)),
            seed=seed,
        ),
        models=[_parse_model(m) for m in raw.get("models") or []],
        data=raw.get("data"),
        forecast=raw.get("forecast") or {},
        simulate=raw.get("simulate") or {},
    )
    return config


# ---------------------------------------------------------------------------
# Data assembly


def build_fit_data(config: RunConfig) -> FitData:
    section = config.data or {}
    if "path" not in section:
        raise ValueError("config data.path is required for fitting")
    dataset = ingest_csv(section["path"], population=section.get("population"))
    window = int(section.get("presmooth_window", 1))
    if window > 1:
        dataset = presmooth(dataset, window)
    population = section.get("population")
    if population is None:
        raise ValueError("config data.population is required")
    initial = section.get("initial") or {}
    e0 = int(initial.get("e0", 0))
    i0 = int(initial.get("i0", 1))
    r0 = int(initial.get("r0", 0))
    s0 = int(initial.get("s0", int(population) - e0 - i0 - r0))
    pop = Population(n=int(population), s0=s0, e0=e0, i0=i0, r0=r0)
    use_removals = bool(section.get("use_removals", dataset.removals is not None))
    return FitData(
        pop=pop,
        istar=dataset.cases,
        rstar=dataset.removals if use_removals and dataset.removals is not None else None,
    )


def _formulation_from_config(section: dict, params: dict, n: int):
    transmission = section.get("transmission", "constant")
    if transmission == "constant":
        return Constant(beta=params.get("beta"))
    if transmission == "intervention":
        return Intervention(
            beta1=float(params["beta1"]),
            beta2=float(params["beta2"]),
            tstar=int(section["intervention_day"]),
        )
    if transmission == "flexible":
        return FlexibleBetaT(
            knots=np.asarray(params["betat_knots"], dtype=float),
            coef=np.asarray(params["betat_coef"], dtype=float),
        )
    if transmission != "alarm":
        raise ValueError(f"unknown transmission {transmission!r}")
    family = section.get("alarm")
    smoothing = _parse_smoothing(section.get("smoothing"))
    if family == "power":
        alarm = PowerAlarm(k=float(params["k"]), n=n)
    elif family == "threshold":
        alarm = ThresholdAlarm(delta=float(params["delta"]), h=float(params["h"]))
    elif family == "hill":
        alarm = HillAlarm(delta=float(params["delta"]), x0=float(params["x0"]), nu=float(params["nu"]))
    elif family == "spline":
        alarm = SplineAlarm(
            knots=np.asarray(params["knots"], dtype=float),
            coef=np.asarray(params["coef"], dtype=float),
            x_max=float(params["x_max"]),
        )
    elif family == "gp":
        alarm = GaussianProcessAlarm(
            grid=np.asarray(params["grid"], dtype=float),
            latent=np.asarray(params["latent"], dtype=float),
            sigma=float(params["sigma"]),
            ell=float(params["ell"]),
        )
    else:
        raise ValueError(f"unknown alarm family {family!r}")
    return AlarmDriven(alarm=alarm, smoothing=smoothing)


# ---------------------------------------------------------------------------
# Verbs


def cmd_simulate(config: RunConfig) -> int:
    section = config.simulate
    if not section:
        raise ValueError("config has no simulate section")
    params = section.get("params") or {}
    pop_raw = section.get("population") or {}
    n = int(pop_raw["n"])
    pop = Population(
        n=n,
        s0=int(pop_raw.get("s0", n - int(pop_raw.get("i0", 1)))),
        e0=int(pop_raw.get("e0", 0)),
        i0=int(pop_raw.get("i0", 1)),
        r0=int(pop_raw.get("r0", 0)),
    )
    seir = bool(section.get("compartments", "sir") == "seir")
    rates = RateParams(
        beta=float(params.get("beta", 1.0)),
        gamma=float(params["gamma"]),
        lam=float(params["lam"]) if seir else None,
    )
    formulation = _formulation_from_config(section.get("model") or {}, params, n)
    horizon = int(section.get("horizon", 100))
    replicates = int(section.get("replicates", 1))
    os.makedirs(config.output_dir, exist_ok=True)
    out_path = os.path.join(config.output_dir, "simulated.csv")
    rng = np.random.default_rng(config.seed)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["replicate", "day", "new_infectious", "new_removed"]
        if seir:
            header.append("new_exposed")
        writer.writerow(header)
        for rep in range(replicates):
            ts = simulate_chain(pop, rates, formulation, horizon, rng)
            for t in range(ts.tau):
                row = [rep, t + 1, int(ts.istar[t]), int(ts.rstar[t])]
                if seir:
                    row.append(int(ts.estar[t]))
                writer.writerow(row)
    print(f"wrote {out_path}")
    return 0


def _model_dir(config: RunConfig, name: str) -> str:
    return os.path.join(config.output_dir, name)


def _fit_one(config: RunConfig, index: int, entry: ModelEntry, data: FitData):
    from dataclasses import replace

    cfg = replace(config.mcmc, seed=config.seed + index)
    samples = run_chain(entry.spec, data, config=cfg, fixed=entry.fixed or None)
    notes = []
    if cfg.chains >= 2 and samples.chains[0].shape[0] >= 10:
        gr = gelman_rubin(samples)
        converged = all(v < GR_THRESHOLD for v in gr.values())
    else:
        gr = {}
        converged = True
        notes.append("convergence diagnostic skipped (needs >= 2 chains and >= 10 draws)")
    return samples, gr, converged, notes


def _write_summary(path, samples, gr, converged, notes):
    with open(path, "w") as fh:
        fh.write("parameter summaries (posterior mean, 95% interval)\n")
        for name, s in summarize(samples, levels=(0.95,)).items():
            lo, hi = s.intervals[0.95]
            r = f"  GR={gr[name]:.4f}" if name in gr else ""
            fh.write(f"  {name}: {s.mean:.6g} [{lo:.6g}, {hi:.6g}]{r}\n")
        fh.write(f"converged: {converged}\n")
        for c, acc in enumerate(samples.accept_rates):
            fh.write(f"chain {c} acceptance: " + ", ".join(f"{k}={v:.3f}" for k, v in sorted(acc.items())) + "\n")
        for note in notes:
            fh.write(note + "\n")


def cmd_fit(config: RunConfig, selected=None) -> int:
    data = build_fit_data(config)
    all_ok = True
    report_lines = []
    os.makedirs(config.output_dir, exist_ok=True)
    for index, entry in enumerate(config.models):
        name = entry.spec.name
        if selected and name not in selected:
            continue
        samples, gr, converged, notes = _fit_one(config, index, entry, data)
        directory = _model_dir(config, name)
        save_samples(samples, directory)
        _write_summary(os.path.join(directory, "summary.txt"), samples, gr, converged, notes)
        worst = max(gr.values()) if gr else float("nan")
        report_lines.append(
            f"{name}: draws={samples.n_draws} converged={converged} max_GR={worst:.4f}"
        )
        all_ok = all_ok and converged
        print(report_lines[-1])
    with open(os.path.join(config.output_dir, "report.txt"), "w") as fh:
        fh.write("fit report\n")
        fh.write("\n".join(report_lines) + "\n")
    return 0 if all_ok else 1


def cmd_compare(config: RunConfig, selected=None) -> int:
    data = build_fit_data(config)
    os.makedirs(config.output_dir, exist_ok=True)
    rows = []
    non_converged = []
    report_lines = ["model comparison (lower WAIC is better)"]
    all_ok = True
    for index, entry in enumerate(config.models):
        name = entry.spec.name
        if selected and name not in selected:
            continue
        samples, gr, converged, notes = _fit_one(config, index, entry, data)
        directory = _model_dir(config, name)
        save_samples(samples, directory)
        _write_summary(os.path.join(directory, "summary.txt"), samples, gr, converged, notes)
        res = waic(samples.stacked_pointwise())
        if converged:
            rows.append((name, res.waic, res.lppd, res.p_waic, True))
        else:
            non_converged.append((name, res.waic))
            all_ok = False
    rows.sort(key=lambda r: r[1])
    save_waic_table(os.path.join(config.output_dir, "waic.csv"), rows)
    for name, w, lppd, p, _ in rows:
        report_lines.append(f"  {name}: WAIC={w:.2f} lppd={lppd:.2f} p_waic={p:.2f}")
    if non_converged:
        report_lines.append("excluded (not converged, diagnostic >= 1.1):")
        for name, w in non_converged:
            report_lines.append(f"  {name}: WAIC={w:.2f} (not comparable)")
    with open(os.path.join(config.output_dir, "report.txt"), "w") as fh:
        fh.write("\n".join(report_lines) + "\n")
    print("\n".join(report_lines))
    return 0 if all_ok else 1


def cmd_forecast(config: RunConfig, selected=None) -> int:
    data = build_fit_data(config)
    section = config.forecast
    horizon = int(section.get("horizon", 50))
    obs_fraction = float(section.get("observation_fraction", 1.0))
    level = float(section.get("level", 0.95))
    max_draws = section.get("max_draws")
    status = 0
    for index, entry in enumerate(config.models):
        name = entry.spec.name
        if selected and name not in selected:
            continue
        directory = _model_dir(config, name)
        if not os.path.exists(os.path.join(directory, "samples.csv")):
            print(f"{name}: no fit artifacts in {directory}; run `epialarm fit` first", file=sys.stderr)
            status = 1
            continue
        samples = load_samples(directory)
        origin = forecast_state(samples, data)
        rng = np.random.default_rng(config.seed + 10_000 + index)
        ens = forecast(
            samples,
            entry.spec,
            origin,
            horizon=horizon,
            obs_fraction=obs_fraction,
            rng=rng,
            level=level,
            max_draws=int(max_draws) if max_draws else None,
            fixed=entry.fixed or None,
        )
        save_forecast(
            os.path.join(directory, "forecast.csv"), ens.mean, ens.lower, ens.upper, data.tau + 1
        )
        _write_r0(config, entry, samples, data, os.path.join(directory, "r0.csv"))
        print(f"{name}: forecast written ({horizon} days, obs fraction {obs_fraction})")
    return status


def _write_r0(config, entry, samples, data, out_path):
    """Posterior mean/interval of R0(t) over the fit window.

    The susceptible path is reconstructed from the observed incidence
    (exact for SIR given observed onsets; for SEIR the exposure drain is
    approximated by the observed onsets, negligible while S stays close
    to N).
    """
    from .chain import CompartmentPath
    from .diagnostics import unflatten
    from .mcmc import Parameterization

    ctx = Parameterization(entry.spec, data, fixed=entry.fixed or None)
    s_path = np.concatenate(([data.pop.s0], data.pop.s0 - np.cumsum(data.istar)))
    zeros = np.zeros_like(s_path)
    path = CompartmentPath(s=s_path, e=zeros, i=zeros, r=data.pop.n - s_path)
    draws = samples.stacked()
    keep = np.linspace(0, draws.shape[0] - 1, min(500, draws.shape[0])).astype(int)
    curves = []
    for d in keep:
        params = unflatten(samples.names, draws[d])
        rates = ctx.rates(params)
        beta_t = ctx.betas_for(params)
        curves.append(r0_effective(path, beta_t, rates.gamma))
    curves = np.asarray(curves)
    mean = curves.mean(axis=0)
    lo, hi = np.quantile(curves, [0.025, 0.975], axis=0)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "mean", "lower", "upper"])
        for t in range(mean.size):
            writer.writerow([t + 1, f"{mean[t]:.6g}", f"{lo[t]:.6g}", f"{hi[t]:.6g}"])


# ---------------------------------------------------------------------------
# Entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="epialarm",
        description="Chain-binomial epidemic models with incidence-driven behavioral feedback",
    )
    parser.add_argument("verb", choices=["simulate", "fit", "forecast", "compare"])
    parser.add_argument("--config", "-c", required=True, help="YAML config document")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument(
        "--models", default=None, help="comma-separated model names to include (default: all)"
    )
    args = parser.parse_args(argv)
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    selected = set(args.models.split(",")) if args.models else None
    if args.verb == "simulate":
        return cmd_simulate(config)
    if args.verb == "fit":
        return cmd_fit(config, selected)
    if args.verb == "compare":
        return cmd_compare(config, selected)
    return cmd_forecast(config, selected)


if __name__ == "__main__":
    sys.exit(main())
