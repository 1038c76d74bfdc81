"""Offline distillation and sparsification.

Greedy loop: sweep the training parameters with the current sparse model,
pick the worst-approximated parameter, train a full network there, extend the
interpolation basis (new magic point), extend the residual basis (new
residual point), refresh the sparse tables, repeat.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (DegenerateResidualError, DegenerateSnapshotError,
                     TrainingSetExhaustedError)
from .full_pinn import Snapshot, train_full_pinn
from .meta_model import (FullTables, MetaArtifact, SparseTables,
                         basis_full_tables, initial_guess,
                         precompute_sparse_tables, s2gpt_full_loss,
                         train_online)
from .optim import OptimConfig
from .pdes import CollocationGrid, PdeSpec
from .reduction import ReducedBasis, eim_step, geim_step, residual_field, sparse_set


@dataclass
class IterationRecord:
    n: int
    selected_index: int
    selected_mu: np.ndarray
    worst_delta: float
    deltas: np.ndarray                 # sparse-loss indicator per training mu
    full_deltas: np.ndarray            # same coefficients, full-grid loss
    magic_index: int
    residual_index: Optional[int]
    fom_loss: float
    fom_seconds: float
    sweep_seconds: float
    flags: list = field(default_factory=list)


@dataclass
class GreedyTrace:
    seed: int
    records: list = field(default_factory=list)
    offline_fom_seconds: float = 0.0
    offline_sweep_seconds: float = 0.0

    @property
    def selected(self) -> list:
        return [r.selected_mu for r in self.records]


def select_next(deltas: np.ndarray, already_chosen) -> int:
    """Index of the largest indicator among non-chosen parameters; ties break
    toward the lowest index."""
    scores = np.array(deltas, dtype=float)
    chosen = list(already_chosen)
    if len(chosen) >= scores.size:
        raise TrainingSetExhaustedError("all training parameters already selected")
    scores[chosen] = -np.inf
    return int(np.argmax(scores))


def sweep_deltas(tables: SparseTables, full: FullTables, pde: PdeSpec,
                 grid: CollocationGrid, xi_train: np.ndarray, c0: np.ndarray,
                 online_cfg: OptimConfig, optimizer: str = "gd",
                 max_workers: Optional[int] = None):
    """Online-train the sparse model at every training parameter.

    Returns (deltas, full_deltas, solutions). Each parameter's solve is
    independent, so results match the sequential order regardless of worker
    count (S2GPT_THREADS caps it).
    """
    if max_workers is None:
        max_workers = int(os.environ.get("S2GPT_THREADS", "1"))
    n_mu = xi_train.shape[0]

    def solve(i):
        sol = train_online(tables, pde, xi_train[i], c0, online_cfg, optimizer)
        fd = s2gpt_full_loss(sol.c, full, pde, grid, xi_train[i])
        return sol, fd

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(solve, range(n_mu)))
    else:
        results = [solve(i) for i in range(n_mu)]
    deltas = np.array([s.delta for s, _ in results])
    full_deltas = np.array([fd for _, fd in results])
    return deltas, full_deltas, [s for s, _ in results]


def offline_run(pde: PdeSpec, grid: CollocationGrid, xi_train: np.ndarray,
                n_basis: int, fom_kwargs: dict, online_cfg: OptimConfig,
                seed: int = 0, online_optimizer: str = "gd",
                checkpoint_cb: Optional[Callable] = None,
                log: Optional[Callable] = None):
    """Run the full offline loop; returns (MetaArtifact, GreedyTrace)."""
    if n_basis < 1:
        raise ValueError("n_basis must be at least 1")
    if xi_train.shape[0] < n_basis:
        raise ValueError(
            f"training set of {xi_train.shape[0]} cannot support {n_basis} picks"
        )
    say = log or (lambda msg: None)
    rng = np.random.default_rng(seed)
    trace = GreedyTrace(seed=seed)

    first = int(rng.integers(xi_train.shape[0]))
    chosen = [first]
    say(f"[1/{n_basis}] full training at mu={xi_train[first]}")
    snap = train_full_pinn(pde, xi_train[first], grid, seed=seed, **fom_kwargs)
    snapshots = [snap]
    trace.offline_fom_seconds += snap.train_seconds

    basis = ReducedBasis.empty(grid.n_points)
    res = geim_step(basis, snap.tables["u"], mu=snap.mu, allowed=grid.interior)
    tables = precompute_sparse_tables(basis, snapshots, pde, grid)
    full = basis_full_tables(basis, snapshots, pde)
    trace.records.append(IterationRecord(
        n=1, selected_index=first, selected_mu=snap.mu.copy(),
        worst_delta=np.nan, deltas=np.full(xi_train.shape[0], np.nan),
        full_deltas=np.full(xi_train.shape[0], np.nan),
        magic_index=res.index, residual_index=None,
        fom_loss=snap.loss, fom_seconds=snap.train_seconds, sweep_seconds=0.0,
    ))
    if checkpoint_cb:
        checkpoint_cb(_artifact(pde, grid, basis, snapshots, tables), trace)

    for n in range(2, n_basis + 1):
        t0 = time.perf_counter()
        c0 = initial_guess(basis)
        deltas, full_deltas, _ = sweep_deltas(
            tables, full, pde, grid, xi_train, c0, online_cfg, online_optimizer)
        sweep_seconds = time.perf_counter() - t0
        trace.offline_sweep_seconds += sweep_seconds

        flags = []
        ineligible = list(chosen)
        while True:
            nxt = select_next(deltas, ineligible)
            say(f"[{n}/{n_basis}] worst delta {deltas[nxt]:.3e} "
                f"at mu={xi_train[nxt]}; full training")
            snap = train_full_pinn(pde, xi_train[nxt], grid, seed=seed + n,
                                   **fom_kwargs)
            try:
                gres = geim_step(basis, snap.tables["u"], mu=snap.mu, allowed=grid.interior)
                break
            except DegenerateSnapshotError:
                flags.append(f"degenerate_snapshot:{nxt}")
                ineligible.append(nxt)
        chosen.append(nxt)
        snapshots.append(snap)
        trace.offline_fom_seconds += snap.train_seconds

        r_field = residual_field(pde, snap, grid)
        res_index = None
        try:
            excluded = set(int(i) for i in sparse_set(basis))
            eres = eim_step(basis, r_field, excluded)
            res_index = eres.index
        except DegenerateResidualError:
            flags.append("degenerate_residual")

        tables = precompute_sparse_tables(basis, snapshots, pde, grid)
        full = basis_full_tables(basis, snapshots, pde)
        trace.records.append(IterationRecord(
            n=n, selected_index=nxt, selected_mu=snap.mu.copy(),
            worst_delta=float(deltas[nxt]), deltas=deltas,
            full_deltas=full_deltas, magic_index=gres.index,
            residual_index=res_index, fom_loss=snap.loss,
            fom_seconds=snap.train_seconds, sweep_seconds=sweep_seconds,
            flags=flags,
        ))
        if checkpoint_cb:
            checkpoint_cb(_artifact(pde, grid, basis, snapshots, tables), trace)

    return _artifact(pde, grid, basis, snapshots, tables), trace


def _artifact(pde, grid, basis, snapshots, tables) -> "MetaArtifact":
    return MetaArtifact(pde=pde, grid=grid, basis=basis,
                        snapshots=snapshots, sparse=tables)
