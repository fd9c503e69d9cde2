"""CSV persistence for posterior samples and derived artifacts.

Floats are written with repr-exact formatting so that a reload reproduces
the in-memory values bit for bit.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .mcmc import PosteriorSamples

_FMT = "%.17g"


def _fmt(value: float) -> str:
    return _FMT % value


def save_samples(samples: PosteriorSamples, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "samples.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["chain", "draw", *samples.names, "loglik", "logprior",
             "final_s", "final_e", "final_i", "final_r"]
        )
        for c, (draws, logdens, terminal) in enumerate(
            zip(samples.chains, samples.logdens, samples.terminal)
        ):
            for d in range(draws.shape[0]):
                writer.writerow(
                    [c, d]
                    + [_fmt(v) for v in draws[d]]
                    + [_fmt(logdens[d, 0]), _fmt(logdens[d, 1])]
                    + [_fmt(v) for v in terminal[d]]
                )
    with open(os.path.join(directory, "pointwise_loglik.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        tau = samples.pointwise[0].shape[1] if samples.pointwise else 0
        writer.writerow(["chain", "draw", *[f"day_{t}" for t in range(1, tau + 1)]])
        for c, block in enumerate(samples.pointwise):
            for d in range(block.shape[0]):
                writer.writerow([c, d] + [_fmt(v) for v in block[d]])


def load_samples(directory: str) -> PosteriorSamples:
    with open(os.path.join(directory, "samples.csv"), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[2:-6]
        per_chain: dict[int, list] = {}
        for row in reader:
            per_chain.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])
    with open(os.path.join(directory, "pointwise_loglik.csv"), newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        pw_chain: dict[int, list] = {}
        for row in reader:
            pw_chain.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])

    chain_ids = sorted(per_chain)
    chains, logdens, terminal, pointwise = [], [], [], []
    k = len(names)
    for c in chain_ids:
        block = np.asarray(per_chain[c], dtype=np.float64).reshape(len(per_chain[c]), -1)
        chains.append(block[:, :k])
        logdens.append(block[:, k : k + 2])
        terminal.append(block[:, k + 2 :])
        pointwise.append(np.asarray(pw_chain.get(c, []), dtype=np.float64))
    return PosteriorSamples(
        names=list(names),
        chains=chains,
        pointwise=pointwise,
        terminal=terminal,
        logdens=logdens,
        accept_rates=[{} for _ in chain_ids],
        final_scales=[{} for _ in chain_ids],
    )


def save_forecast(path: str, mean, lower, upper, first_day: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "mean", "lower", "upper"])
        for j in range(len(mean)):
            writer.writerow([first_day + j, _fmt(mean[j]), _fmt(lower[j]), _fmt(upper[j])])


def save_waic_table(path: str, rows) -> None:
    """rows: iterable of (model, waic, lppd, p_waic, converged)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "waic", "lppd", "p_waic", "converged"])
        for model, w, lppd, p, conv in rows:
            writer.writerow([model, _fmt(w), _fmt(lppd), _fmt(p), int(conv)])
