"""Full-order model: train one complete PINN at a parameter value and
materialize its jet tables on the full collocation grid (the snapshot)."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diffnet import MlpParams, forward_jet, init_params, pinn_loss_grad
from .errors import DivergenceError
from .optim import OptimConfig, adam_run, run_optimizer
from .pdes import CollocationGrid, PdeSpec


@dataclass
class Snapshot:
    """A trained full PINN plus its slot tables on the full grid."""

    mu: np.ndarray
    params: MlpParams
    loss: float
    tables: dict = field(repr=False)          # slot name -> (N_h,) array
    train_seconds: float = 0.0
    seed: int = 0
    flag: Optional[str] = None
    loss_history: list = field(default_factory=list, repr=False)


def snapshot_tables(params: MlpParams, grid: CollocationGrid, pde: PdeSpec) -> dict:
    """forward_jet over the full grid for the PDE's slots plus u itself."""
    request = ("u",) + tuple(pde.required_slots)
    jet = forward_jet(params, grid.points, request, axes=pde.axes)
    return dict(jet.data)


def train_full_pinn(pde: PdeSpec, mu, grid: CollocationGrid,
                    layers=None, optim_config: Optional[OptimConfig] = None,
                    optimizer: str = "lbfgs", seed: int = 0,
                    adam_warmup: int = 0, adam_learning_rate: float = 1e-3,
                    loss_weights=(1.0, 1.0, 1.0)) -> Snapshot:
    """Train the full network at mu and return the materialized Snapshot.

    Divergence (non-finite loss) triggers one retry with a fresh seed, then
    raises. `epochs == 0` skips training and snapshots the initialization.
    """
    mu = pde.validate_params(mu)
    layers = tuple(layers) if layers is not None else pde.defaults.layers
    cfg = optim_config or OptimConfig(learning_rate=0.1, epochs=50)

    def attempt(use_seed):
        params = init_params(layers, use_seed)
        sizes = params.sizes

        def oracle(flat):
            p = MlpParams.from_flat(sizes, flat)
            return pinn_loss_grad(p, pde, grid, mu, loss_weights)

        t0 = time.perf_counter()
        x = params.flatten()
        history = []
        if adam_warmup > 0:
            warm = OptimConfig(learning_rate=adam_learning_rate, epochs=adam_warmup)
            res = adam_run(oracle, x, warm)
            if res.flag == "nan":
                return res, time.perf_counter() - t0
            x = res.x
            history = res.loss_history[:-1]
        res = run_optimizer(optimizer, oracle, x, cfg)
        res.loss_history = history + res.loss_history
        return res, time.perf_counter() - t0

    if cfg.epochs == 0:
        params = init_params(layers, seed)
        loss, _ = pinn_loss_grad(params, pde, grid, mu, loss_weights, want_grad=False)
        return Snapshot(mu=mu, params=params, loss=loss,
                        tables=snapshot_tables(params, grid, pde),
                        train_seconds=0.0, seed=seed, loss_history=[loss])

    res, seconds = attempt(seed)
    used_seed = seed
    if res.flag == "nan":
        used_seed = seed + 1
        res, seconds = attempt(used_seed)
        if res.flag == "nan":
            raise DivergenceError(
                f"full PINN training diverged twice at mu={mu} "
                f"(seeds {seed}, {used_seed}); last losses {res.loss_history[-3:]}"
            )
    params = MlpParams.from_flat(layers, res.x)
    return Snapshot(
        mu=mu,
        params=params,
        loss=res.loss,
        tables=snapshot_tables(params, grid, pde),
        train_seconds=seconds,
        seed=used_seed,
        flag=res.flag,
        loss_history=res.loss_history,
    )
