"""Benchmark orchestration: offline run, held-out test sweep, report CSVs.

Emits per-figure data: worst-case loss decay (sparse and full evaluation),
selected parameters, sparse-point coordinates, per-test-parameter L2 errors
for the sparse model and the dense baseline, and cumulative online times.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import replace

import numpy as np

from .config import RunConfig
from .errors import ConfigError
from .full_pinn import train_full_pinn
from .greedy import offline_run
from .meta_model import (MetaArtifact, initial_guess, snapshot_full_tables,
                         train_online, train_online_gpt)
from .metrics import compute_error_metrics
from .pdes import build_grid, sample_parameter_grid, sample_test_parameters
from .store import save_artifact


def _writer(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def training_grid(cfg: RunConfig, pde) -> np.ndarray:
    return sample_parameter_grid(pde, cfg.train_counts, box=cfg.train_domain)


def run_offline(cfg: RunConfig, log=None):
    pde = cfg.make_pde()
    grid = build_grid(pde, cfg.grid)
    xi_train = training_grid(cfg, pde)
    checkpoint_cb = None
    if cfg.checkpoint:
        def checkpoint_cb(artifact, trace):
            save_artifact(cfg.output_dir, artifact, cfg, trace, xi_train)
    artifact, trace = offline_run(
        pde, grid, xi_train, cfg.n_basis, cfg.fom.fom_kwargs(),
        cfg.online.optim_config(), seed=cfg.seed,
        online_optimizer=cfg.online.optimizer,
        checkpoint_cb=checkpoint_cb, log=log,
    )
    save_artifact(cfg.output_dir, artifact, cfg, trace, xi_train)
    return artifact, trace, xi_train


def write_decay_csv(outdir, trace):
    fh, wr = _writer(os.path.join(outdir, "loss_decay.csv"))
    with fh:
        wr.writerow(["n", "worst_delta", "worst_delta_full_at_argmax",
                     "worst_delta_full_max"])
        for rec in trace.records:
            if np.all(np.isnan(rec.deltas)):
                continue
            k = int(np.argmax(rec.deltas))
            wr.writerow([rec.n - 1, repr(float(rec.deltas[k])),
                         repr(float(rec.full_deltas[k])),
                         repr(float(np.max(rec.full_deltas)))])


def write_selected_csv(outdir, artifact: MetaArtifact):
    n_params = artifact.pde.n_params
    fh, wr = _writer(os.path.join(outdir, "selected_params.csv"))
    with fh:
        wr.writerow(["n"] + [f"mu_{i}" for i in range(n_params)])
        for k, mu in enumerate(artifact.basis.mus, start=1):
            wr.writerow([k] + [repr(float(v)) for v in mu])


def write_points_csv(outdir, artifact: MetaArtifact):
    fh, wr = _writer(os.path.join(outdir, "sparse_points.csv"))
    with fh:
        wr.writerow(["kind", "step", "grid_index", "x0", "x1"])
        pts = artifact.grid.points
        for k, idx in enumerate(artifact.basis.magic_idx, start=1):
            wr.writerow(["magic", k, idx,
                         repr(float(pts[idx, 0])), repr(float(pts[idx, 1]))])
        for k, idx in enumerate(artifact.basis.res_idx, start=1):
            wr.writerow(["residual", k, idx,
                         repr(float(pts[idx, 0])), repr(float(pts[idx, 1]))])


def _reference_field(cfg: RunConfig, artifact: MetaArtifact, mu, idx):
    mode = cfg.test.reference
    pde = artifact.pde
    if mode == "auto":
        mode = "exact" if pde.exact is not None else "fom"
    if mode == "none":
        return None
    if mode == "exact":
        if pde.exact is None:
            raise ConfigError(f"{pde.name} has no exact solution for reference")
        u = pde.exact(mu)
        pts = artifact.grid.points
        return u(pts[:, 0], pts[:, 1])
    snap = train_full_pinn(pde, mu, artifact.grid,
                           seed=cfg.seed + 1000 + idx, **cfg.fom.fom_kwargs())
    return snap.tables["u"]


def run_test_sweep(cfg: RunConfig, artifact: MetaArtifact, trace, log=None):
    """Held-out queries for both methods, with timing and error reports."""
    say = log or (lambda msg: None)
    outdir = cfg.output_dir
    pde = artifact.pde
    test_mus = sample_test_parameters(pde, cfg.test.counts)
    online_cfg = cfg.online.optim_config()
    if cfg.test.online_epochs:
        online_cfg = replace(online_cfg, epochs=int(cfg.test.online_epochs))
    c0 = initial_guess(artifact.basis)
    full_raw = snapshot_full_tables(artifact.snapshots, pde) if cfg.baseline else None
    c0_gpt = artifact.basis.beta.T @ c0

    err_fh, err_wr = _writer(os.path.join(outdir, "errors.csv"))
    tim_fh, tim_wr = _writer(os.path.join(outdir, "timing.csv"))
    n_params = pde.n_params
    mu_cols = [f"mu_{i}" for i in range(n_params)]
    results = []
    with err_fh, tim_fh:
        err_wr.writerow(["index"] + mu_cols
                        + ["delta", "l2_s2gpt", "l2_gpt"])
        tim_wr.writerow(["index", "s2gpt_seconds", "s2gpt_cumulative",
                         "gpt_seconds", "gpt_cumulative"])
        cum_s, cum_g = 0.0, 0.0
        for i, mu in enumerate(test_mus):
            sol = train_online(artifact.sparse, pde, mu, c0, online_cfg,
                               cfg.online.optimizer)
            field = artifact.basis.xi @ sol.c
            gpt_sec = ""
            l2_gpt = ""
            gsol = None
            if cfg.baseline:
                gsol = train_online_gpt(full_raw, pde, artifact.grid, mu,
                                        c0_gpt, online_cfg, cfg.online.optimizer,
                                        cfg.fom.loss_weights)
                gpt_field = artifact.basis.raw @ gsol.c
                cum_g += gsol.seconds
                gpt_sec = repr(gsol.seconds)
            ref = _reference_field(cfg, artifact, mu, i)
            l2_s = ""
            if ref is not None:
                l2_s = repr(compute_error_metrics(field, ref).rel_l2)
                if cfg.baseline:
                    l2_gpt = repr(compute_error_metrics(gpt_field, ref).rel_l2)
            cum_s += sol.seconds
            err_wr.writerow([i] + [repr(float(v)) for v in mu]
                            + [repr(sol.delta), l2_s, l2_gpt])
            tim_wr.writerow([i, repr(sol.seconds), repr(cum_s),
                             gpt_sec, repr(cum_g) if cfg.baseline else ""])
            results.append({"mu": mu, "sol": sol, "gsol": gsol, "ref": ref})
            say(f"test {i + 1}/{len(test_mus)}: delta {sol.delta:.3e}")

    fom_secs = [s.train_seconds for s in artifact.snapshots if s.train_seconds > 0]
    summary = {
        "n_test": len(test_mus),
        "mean_s2gpt_seconds": cum_s / len(test_mus),
        "mean_gpt_seconds": (cum_g / len(test_mus)) if cfg.baseline else None,
        "mean_fom_seconds": float(np.mean(fom_secs)) if fom_secs else None,
        "time_ratio_s2gpt_vs_gpt": (cum_s / cum_g) if cfg.baseline and cum_g else None,
        "online_epochs": online_cfg.epochs,
    }
    with open(os.path.join(outdir, "benchmark_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return results, summary


def run_benchmark(cfg: RunConfig, log=None):
    artifact, trace, xi_train = run_offline(cfg, log=log)
    write_decay_csv(cfg.output_dir, trace)
    write_selected_csv(cfg.output_dir, artifact)
    write_points_csv(cfg.output_dir, artifact)
    results, summary = run_test_sweep(cfg, artifact, trace, log=log)
    return artifact, trace, summary
