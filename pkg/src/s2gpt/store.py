"""On-disk artifact layout.

    manifest.json    format version, backend, seed, effective config echo
    snapshots/       mu_<k>.json: layer sizes + row-major weight arrays
    basis.json       beta, point indices, per-step alphas, selected parameters
    tables.bin       little-endian float64 arrays, concatenated
    tables.json      sidecar: array name -> shape and offset (in doubles)
    trace.csv        one row per (n, mu) sweep record
    summary.json     per-iteration selections, losses, wall times

JSON is serialized deterministically (sorted keys, fixed separators), so a
save → load → save round trip is byte-identical; binary arrays round-trip
exactly.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Optional

import numpy as np

from . import backend
from .config import RunConfig, config_from_dict, config_to_dict
from .diffnet import MlpParams
from .errors import ArtifactError
from .full_pinn import Snapshot, snapshot_tables
from .greedy import GreedyTrace
from .meta_model import MetaArtifact, SparseTables
from .pdes import build_grid
from .reduction import ReducedBasis
from .slots import N_SLOTS

FORMAT_VERSION = 1


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}")


def _write_tables(outdir, arrays: dict):
    sidecar = {}
    offset = 0
    with open(os.path.join(outdir, "tables.bin"), "wb") as fh:
        for name in sorted(arrays):
            arr = np.ascontiguousarray(arrays[name], dtype="<f8")
            fh.write(arr.tobytes())
            sidecar[name] = {"shape": list(arr.shape), "offset": offset}
            offset += arr.size
    _dump_json(os.path.join(outdir, "tables.json"), sidecar)


def _read_tables(outdir) -> dict:
    sidecar = _load_json(os.path.join(outdir, "tables.json"))
    raw = np.fromfile(os.path.join(outdir, "tables.bin"), dtype="<f8")
    out = {}
    for name, meta in sidecar.items():
        shape = tuple(meta["shape"])
        size = int(np.prod(shape)) if shape else 1
        out[name] = raw[meta["offset"]: meta["offset"] + size].reshape(shape).copy()
    return out


def save_artifact(outdir: str, artifact: MetaArtifact, cfg: RunConfig,
                  trace: Optional[GreedyTrace] = None,
                  xi_train: Optional[np.ndarray] = None):
    os.makedirs(outdir, exist_ok=True)
    os.makedirs(os.path.join(outdir, "snapshots"), exist_ok=True)

    manifest = {
        "format": FORMAT_VERSION,
        "backend": backend.backend_name(),
        "seed": cfg.seed,
        "config": config_to_dict(cfg),
    }
    _dump_json(os.path.join(outdir, "manifest.json"), manifest)

    for k, snap in enumerate(artifact.snapshots):
        _dump_json(os.path.join(outdir, "snapshots", f"mu_{k:03d}.json"), {
            "mu": [float(v) for v in snap.mu],
            "sizes": list(snap.params.sizes),
            "flat": [float(v) for v in snap.params.flatten()],
            "loss": float(snap.loss),
            "train_seconds": float(snap.train_seconds),
            "seed": int(snap.seed),
            "flag": snap.flag,
        })

    basis = artifact.basis
    _dump_json(os.path.join(outdir, "basis.json"), {
        "n": basis.n,
        "beta": [[float(v) for v in row] for row in basis.beta],
        "magic_idx": [int(i) for i in basis.magic_idx],
        "res_idx": [int(i) for i in basis.res_idx],
        "alphas": [[float(v) for v in a] for a in basis.alphas],
        "mus": [[float(v) for v in m] for m in basis.mus],
        "srow": [float(v) for v in basis.beta_row_sums()],
        "sparse_indices": [int(i) for i in artifact.sparse.indices],
        "sparse_slots": list(artifact.sparse.slots),
    })

    _write_tables(outdir, {
        "xi": basis.xi,
        "raw": basis.raw,
        "res_basis": basis.res_basis,
        "sparse_dense": artifact.sparse.dense,
        "sparse_coords": artifact.sparse.coords,
    })

    if trace is not None:
        if xi_train is None:
            raise ArtifactError("saving a trace needs the training grid")
        save_trace(outdir, trace, xi_train)


def save_trace(outdir: str, trace: GreedyTrace, xi_train: np.ndarray):
    n_params = xi_train.shape[1]
    mu_cols = [f"mu_{i}" for i in range(n_params)]
    with open(os.path.join(outdir, "trace.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "train_index"] + mu_cols
                    + ["delta", "delta_full", "selected"])
        for rec in trace.records:
            if np.all(np.isnan(rec.deltas)):
                continue
            for i, (d, df) in enumerate(zip(rec.deltas, rec.full_deltas)):
                wr.writerow([rec.n, i]
                            + [repr(float(v)) for v in xi_train[i]]
                            + [repr(float(d)), repr(float(df)),
                               int(i == rec.selected_index)])

    _dump_json(os.path.join(outdir, "summary.json"), {
        "seed": trace.seed,
        "offline_fom_seconds": trace.offline_fom_seconds,
        "offline_sweep_seconds": trace.offline_sweep_seconds,
        "iterations": [{
            "n": rec.n,
            "selected_index": rec.selected_index,
            "selected_mu": [float(v) for v in rec.selected_mu],
            "worst_delta": None if np.isnan(rec.worst_delta) else float(rec.worst_delta),
            "magic_index": int(rec.magic_index),
            "residual_index": None if rec.residual_index is None else int(rec.residual_index),
            "fom_loss": float(rec.fom_loss),
            "fom_seconds": float(rec.fom_seconds),
            "sweep_seconds": float(rec.sweep_seconds),
            "flags": list(rec.flags),
        } for rec in trace.records],
    })


def load_artifact(outdir: str):
    """Rebuild (MetaArtifact, RunConfig) from disk.

    Snapshot jet tables are regenerated from the stored weights (the forward
    pass is deterministic, so regeneration is bit-compatible with the run
    that saved them, given the same backend).
    """
    manifest = _load_json(os.path.join(outdir, "manifest.json"))
    if manifest.get("format") != FORMAT_VERSION:
        raise ArtifactError(f"unsupported artifact format {manifest.get('format')}")
    cfg = config_from_dict(manifest["config"])
    pde = cfg.make_pde()
    grid = build_grid(pde, cfg.grid)

    snapdir = os.path.join(outdir, "snapshots")
    snapshots = []
    for name in sorted(os.listdir(snapdir)):
        meta = _load_json(os.path.join(snapdir, name))
        params = MlpParams.from_flat(meta["sizes"], np.array(meta["flat"]))
        snapshots.append(Snapshot(
            mu=np.array(meta["mu"]),
            params=params,
            loss=meta["loss"],
            tables=snapshot_tables(params, grid, pde),
            train_seconds=meta["train_seconds"],
            seed=meta["seed"],
            flag=meta.get("flag"),
        ))

    b = _load_json(os.path.join(outdir, "basis.json"))
    arrays = _read_tables(outdir)
    basis = ReducedBasis(
        n_grid=grid.n_points,
        xi=arrays["xi"],
        raw=arrays["raw"],
        beta=np.array(b["beta"], dtype=float).reshape(b["n"], b["n"]),
        magic_idx=list(b["magic_idx"]),
        res_idx=list(b["res_idx"]),
        alphas=[np.array(a, dtype=float) for a in b["alphas"]],
        res_basis=arrays["res_basis"],
        mus=[np.array(m, dtype=float) for m in b["mus"]],
    )
    sparse = SparseTables(
        pde_name=pde.name,
        indices=np.array(b["sparse_indices"], dtype=int),
        coords=arrays["sparse_coords"],
        dense=arrays["sparse_dense"].reshape(N_SLOTS, basis.n, -1),
        srow=np.array(b["srow"], dtype=float),
        slots=tuple(b["sparse_slots"]),
    )
    artifact = MetaArtifact(pde=pde, grid=grid, basis=basis,
                            snapshots=snapshots, sparse=sparse)
    return artifact, cfg, manifest
