"""Command-line interface.

    s2gpt offline <config.json>            run the offline stage, write the store
    s2gpt online <artifact> --mu ...       coefficient-only solves at new parameters
    s2gpt benchmark <config.json>          offline + held-out comparison reports
    s2gpt fom <config.json> --mu ...       train standalone full networks
    s2gpt kernel-bench                     numba vs numpy kernel comparison

`--seed` overrides the config seed; S2GPT_THREADS caps sweep parallelism;
S2GPT_BACKEND selects the kernel backend (auto/numba/numpy).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .benchmark import run_benchmark, run_offline, run_test_sweep
from .config import load_config
from .errors import S2gptError
from .full_pinn import train_full_pinn
from .kernel_bench import run_kernel_bench
from .meta_model import initial_guess, snapshot_full_tables, train_online, train_online_gpt
from .metrics import compute_error_metrics
from .pdes import build_grid
from .store import load_artifact


def _parse_mu(values, n_params):
    out = []
    for v in values:
        parts = [float(x) for x in v.split(",")]
        if len(parts) != n_params:
            raise S2gptError(f"--mu {v!r}: expected {n_params} component(s)")
        out.append(np.array(parts))
    return out


def _cmd_offline(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    artifact, trace, _ = run_offline(cfg, log=print)
    print(f"artifact written to {cfg.output_dir} "
          f"(basis {artifact.basis.n}, sparse points {artifact.sparse.m})")
    return 0


def _cmd_online(args):
    artifact, cfg, _ = load_artifact(args.artifact)
    pde = artifact.pde
    mus = []
    if args.mu:
        mus += _parse_mu(args.mu, pde.n_params)
    if args.mu_file:
        with open(args.mu_file) as fh:
            data = json.load(fh)
        mus += [np.atleast_1d(np.asarray(m, dtype=float)) for m in data]
    if not mus:
        raise S2gptError("give at least one --mu or a --mu-file")
    for mu in mus:
        pde.validate_params(mu)

    outdir = args.out or os.path.join(args.artifact, "online")
    os.makedirs(outdir, exist_ok=True)
    online_cfg = cfg.online.optim_config()
    c0 = initial_guess(artifact.basis)
    baseline = cfg.baseline if args.baseline is None else args.baseline
    full_raw = snapshot_full_tables(artifact.snapshots, pde) if baseline else None
    c0_gpt = artifact.basis.beta.T @ c0

    stored = np.array([s.mu for s in artifact.snapshots])
    sidecar = {}
    with open(os.path.join(outdir, "report.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index"] + [f"mu_{i}" for i in range(pde.n_params)]
                    + ["delta", "seconds", "gpt_seconds", "time_ratio",
                       "rel_l2_vs_snapshot"])
        for i, mu in enumerate(mus):
            sol = train_online(artifact.sparse, pde, mu, c0, online_cfg,
                               cfg.online.optimizer)
            field = artifact.basis.xi @ sol.c
            field.astype("<f8").tofile(os.path.join(outdir, f"field_{i:03d}.bin"))
            sidecar[f"field_{i:03d}.bin"] = {"shape": [int(field.size)],
                                             "mu": [float(v) for v in mu]}
            gpt_sec = ratio = rel = ""
            if baseline:
                gsol = train_online_gpt(full_raw, pde, artifact.grid, mu,
                                        c0_gpt, online_cfg, cfg.online.optimizer,
                                        cfg.fom.loss_weights)
                gpt_sec = repr(gsol.seconds)
                ratio = repr(sol.seconds / gsol.seconds) if gsol.seconds else ""
            match = np.where(np.all(np.isclose(stored, mu, rtol=0, atol=1e-12),
                                    axis=1))[0]
            if match.size:
                ref = artifact.snapshots[int(match[0])].tables["u"]
                rel = repr(compute_error_metrics(field, ref).rel_l2)
            wr.writerow([i] + [repr(float(v)) for v in mu]
                        + [repr(sol.delta), repr(sol.seconds), gpt_sec, ratio, rel])
            print(f"mu={np.array2string(mu, precision=6)}  delta={sol.delta:.3e}  "
                  f"time={sol.seconds * 1e3:.2f} ms")
    with open(os.path.join(outdir, "fields.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"online report written to {outdir}")
    return 0


def _cmd_benchmark(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    artifact, trace, summary = run_benchmark(cfg, log=print)
    print(json.dumps(summary, indent=2, sort_keys=True))
    print(f"benchmark reports written to {cfg.output_dir}")
    return 0


def _cmd_fom(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    pde = cfg.make_pde()
    grid = build_grid(pde, cfg.grid)
    mus = _parse_mu(args.mu, pde.n_params)
    outdir = args.out or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    for i, mu in enumerate(mus):
        snap = train_full_pinn(pde, mu, grid, seed=cfg.seed + i,
                               **cfg.fom.fom_kwargs())
        path = os.path.join(outdir, f"fom_{i:03d}.json")
        with open(path, "w") as fh:
            json.dump({
                "mu": [float(v) for v in snap.mu],
                "sizes": list(snap.params.sizes),
                "flat": [float(v) for v in snap.params.flatten()],
                "loss": snap.loss,
                "train_seconds": snap.train_seconds,
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"mu={np.array2string(snap.mu, precision=6)}  "
              f"loss={snap.loss:.3e}  time={snap.train_seconds:.1f}s -> {path}")
    return 0


def _cmd_kernel_bench(args):
    run_kernel_bench(csv_path=args.csv)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="s2gpt", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("offline", help="run the offline distillation stage")
    sp.add_argument("config")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(fn=_cmd_offline)

    sp = sub.add_parser("online", help="solve at new parameters from an artifact")
    sp.add_argument("artifact")
    sp.add_argument("--mu", action="append",
                    help="parameter point, comma-separated components; repeatable")
    sp.add_argument("--mu-file", help="JSON file with a list of parameter points")
    sp.add_argument("--out", default=None)
    sp.add_argument("--baseline", action=argparse.BooleanOptionalAction, default=None,
                    help="also run the dense-baseline solve for timing")
    sp.set_defaults(fn=_cmd_online)

    sp = sub.add_parser("benchmark", help="offline + held-out comparison reports")
    sp.add_argument("config")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(fn=_cmd_benchmark)

    sp = sub.add_parser("fom", help="train standalone full networks")
    sp.add_argument("config")
    sp.add_argument("--mu", action="append", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_fom)

    sp = sub.add_parser("kernel-bench", help="numba vs numpy kernel timings")
    sp.add_argument("--csv", default=None)
    sp.set_defaults(fn=_cmd_kernel_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except S2gptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
