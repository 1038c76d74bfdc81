"""Micro-benchmark of the numba kernels against the pure-numpy fallback.

Times the hot operations on representative shapes and, as the end-to-end
case, a full online coefficient solve. Run via `s2gpt kernel-bench`.
"""

from __future__ import annotations

import csv
import time

import numpy as np

from . import _kernels_numpy
from .optim import OptimConfig, gd_run

try:
    from . import _kernels_numba
except ImportError:
    _kernels_numba = None


def _time(fn, repeats=5, min_seconds=0.05):
    # calibrate an inner loop so each sample is long enough to trust
    fn()
    n_inner = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n_inner):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_seconds or n_inner >= 1 << 20:
            break
        n_inner *= 2
    best = dt / n_inner
    for _ in range(repeats - 1):
        t0 = time.perf_counter()
        for _ in range(n_inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / n_inner)
    return best


def _cases(rng):
    p, w = 4096, 20
    a = rng.standard_normal((5, p, w))
    t = _kernels_numpy.tanh_jet_forward(a, np.empty_like(a))
    g = rng.standard_normal((5, p, w))
    buf = np.empty_like(a)

    slots = rng.standard_normal((20000, 7))
    coords = rng.uniform(-1, 1, size=(20000, 2))
    nu = np.array([0.5, 0.0, 0.0])

    n, m = 10, 19
    tables = rng.standard_normal((7, n, m))
    c = rng.standard_normal(n)
    srow = rng.standard_normal(n)
    sm_coords = rng.uniform(-1, 1, size=(m, 2))

    def online_solve(mod):
        def oracle(cc):
            return mod.sparse_loss_grad(2, tables, cc, srow, nu, sm_coords)
        cfg = OptimConfig(learning_rate=1e-3, epochs=2000)
        return lambda: gd_run(oracle, c, cfg)

    return [
        ("tanh_jet_forward_4096x20",
         lambda mod: lambda: mod.tanh_jet_forward(a, buf)),
        ("tanh_jet_backward_4096x20",
         lambda mod: lambda: mod.tanh_jet_backward(t, a, g, buf)),
        ("residual_batch_burgers_20k",
         lambda mod: lambda: mod.residual_batch(2, slots, nu, coords)),
        ("residual_partials_burgers_20k",
         lambda mod: lambda: mod.residual_partials_batch(2, slots, nu, coords)),
        ("sparse_loss_grad_n10_m19",
         lambda mod: lambda: mod.sparse_loss_grad(2, tables, c, srow, nu, sm_coords)),
        ("online_solve_2000_epochs", online_solve),
    ]


def run_kernel_bench(csv_path=None, log=print):
    rng = np.random.default_rng(7)
    rows = []
    log(f"{'operation':36s} {'numpy_ms':>12s} {'numba_ms':>12s} {'speedup':>9s}")
    for name, make in _cases(rng):
        t_np = _time(make(_kernels_numpy)) * 1e3
        if _kernels_numba is not None:
            t_nb = _time(make(_kernels_numba)) * 1e3
            speedup = t_np / t_nb
            log(f"{name:36s} {t_np:12.4f} {t_nb:12.4f} {speedup:8.1f}x")
            rows.append((name, t_np, t_nb, speedup))
        else:
            log(f"{name:36s} {t_np:12.4f} {'n/a':>12s} {'n/a':>9s}")
            rows.append((name, t_np, None, None))
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["operation", "numpy_ms", "numba_ms", "speedup"])
            for r in rows:
                wr.writerow(r)
    return rows
