"""Reduced networks.

The sparse model combines the orthonormalized basis with n trainable
coefficients and evaluates its physics loss on the 2n−1 sparse points only;
the dense baseline uses the same coefficient ansatz over raw snapshots with
the full-grid loss. Both losses are polynomial in the coefficients, and their
gradients are assembled from the residual's slot partials.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import backend
from .diffnet import forward_jet
from .errors import ConsistencyError
from .optim import OptimConfig, run_optimizer
from .pdes import CollocationGrid, DirichletBC, PdeSpec
from .reduction import ReducedBasis, sparse_set
from .slots import N_SLOTS, SLOT_INDEX


@dataclass
class SparseTables:
    """Everything the online stage touches: per-basis slot values at the
    sparse points, the transform row sums, and the point coordinates."""

    pde_name: str
    indices: np.ndarray            # (m,) grid indices of the sparse points
    coords: np.ndarray             # (m, 2)
    dense: np.ndarray              # (7, n, m), zero rows for unused slots
    srow: np.ndarray               # (n,) beta row sums
    slots: tuple                   # slot names actually populated

    @property
    def n(self) -> int:
        return self.dense.shape[1]

    @property
    def m(self) -> int:
        return self.dense.shape[2]

    def table(self, slot: str) -> np.ndarray:
        return self.dense[SLOT_INDEX[slot]]


@dataclass
class FullTables:
    """Per-basis (or per-snapshot) slot tables on the whole grid."""

    tables: dict                   # slot name -> (n, N_h)
    srow: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return next(iter(self.tables.values())).shape[0]


@dataclass
class MetaSolution:
    c: np.ndarray
    delta: float
    loss_history: list = field(repr=False)
    seconds: float = 0.0
    converged: bool = False
    flag: Optional[str] = None


@dataclass
class MetaArtifact:
    """Offline product: basis, snapshots and the sparse tables, with the grid
    and PDE they belong to."""

    pde: PdeSpec
    grid: CollocationGrid
    basis: ReducedBasis
    snapshots: list
    sparse: SparseTables


def stack_snapshot_tables(snapshots, slots) -> dict:
    return {s: np.vstack([snap.tables[s] for snap in snapshots]) for s in slots}


def precompute_sparse_tables(basis: ReducedBasis, snapshots, pde: PdeSpec,
                             grid: CollocationGrid) -> SparseTables:
    """Slot tables of the orthonormalized basis at the sparse points.

    Differentiation is linear, so each basis function's slot table is the
    beta-combination of the snapshots' slot tables.
    """
    if basis.n != len(snapshots):
        raise ConsistencyError(
            f"basis size {basis.n} vs {len(snapshots)} snapshots"
        )
    idx = sparse_set(basis)
    slots = ("u",) + tuple(pde.required_slots)
    dense = np.zeros((N_SLOTS, basis.n, idx.size))
    raw = stack_snapshot_tables(snapshots, slots)
    for s in slots:
        dense[SLOT_INDEX[s]] = basis.beta @ raw[s][:, idx]
    return SparseTables(
        pde_name=pde.name,
        indices=idx,
        coords=grid.points[idx].copy(),
        dense=dense,
        srow=basis.beta_row_sums(),
        slots=slots,
    )


def basis_full_tables(basis: ReducedBasis, snapshots, pde: PdeSpec) -> FullTables:
    """Full-grid slot tables of the orthonormalized basis (corroboration)."""
    slots = ("u",) + tuple(pde.required_slots)
    raw = stack_snapshot_tables(snapshots, slots)
    return FullTables(tables={s: basis.beta @ raw[s] for s in slots},
                      srow=basis.beta_row_sums())


def snapshot_full_tables(snapshots, pde: PdeSpec) -> FullTables:
    """Full-grid slot tables of the raw snapshots (dense baseline)."""
    slots = ("u",) + tuple(pde.required_slots)
    return FullTables(tables=stack_snapshot_tables(snapshots, slots))


def s2gpt_loss_grad(c: np.ndarray, tables: SparseTables, pde: PdeSpec, mu):
    """Sparse loss (mean squared residual over X^m plus the transform-row-sum
    initial-condition penalty) and its gradient over the coefficients."""
    c = np.asarray(c, dtype=float)
    loss, grad = backend.sparse_loss_grad(
        pde.pde_id, tables.dense, c, tables.srow, pde.params3(mu), tables.coords
    )
    return float(loss), grad


def s2gpt_full_loss(c: np.ndarray, full: FullTables, pde: PdeSpec,
                    grid: CollocationGrid, mu) -> float:
    """The sparse-model loss re-evaluated with full-grid interior collocation."""
    c = np.asarray(c, dtype=float)
    ii = grid.interior
    slots = np.zeros((ii.size, N_SLOTS))
    for s, tab in full.tables.items():
        slots[:, SLOT_INDEX[s]] = c @ tab[:, ii]
    r = pde.residual(slots, mu, grid.points[ii])
    a = float(c @ full.srow) - 1.0
    return float(r @ r) / ii.size + a * a


def initial_guess(basis: ReducedBasis, n: Optional[int] = None) -> np.ndarray:
    """Interpolation coefficients of the latest snapshot on the prior basis,
    padded with one zero; [0] for a single-function basis."""
    n = basis.n if n is None else int(n)
    if n < 1 or n > basis.n:
        raise ValueError(f"basis has {basis.n} steps, requested {n}")
    alpha = basis.alphas[n - 1]
    c0 = np.zeros(n)
    c0[: alpha.size] = alpha
    return c0


def train_online(tables: SparseTables, pde: PdeSpec, mu, c0: np.ndarray,
                 config: OptimConfig, optimizer: str = "gd") -> MetaSolution:
    """Coefficient-only training on the sparse loss; wall time is measured
    strictly around the optimization loop (tables are precomputed)."""
    mu = pde.validate_params(mu)
    dense = tables.dense
    srow = tables.srow
    coords = tables.coords
    p3 = pde.params3(mu)
    pde_id = pde.pde_id

    def oracle(c):
        return backend.sparse_loss_grad(pde_id, dense, c, srow, p3, coords)

    t0 = time.perf_counter()
    res = run_optimizer(optimizer, oracle, np.asarray(c0, dtype=float), config)
    seconds = time.perf_counter() - t0
    return MetaSolution(c=res.x, delta=res.loss, loss_history=res.loss_history,
                        seconds=seconds, converged=res.converged, flag=res.flag)


def gpt_loss_grad(c: np.ndarray, full: FullTables, pde: PdeSpec,
                  grid: CollocationGrid, mu, loss_weights=(1.0, 1.0, 1.0)):
    """Full-grid loss of the dense baseline ansatz (coefficients over raw
    snapshots) and its gradient; term structure matches the full PINN loss."""
    c = np.asarray(c, dtype=float)
    w_r, w_i, w_b = loss_weights
    tabs = full.tables
    grad = np.zeros(c.size)

    ii = grid.interior
    slots = np.zeros((ii.size, N_SLOTS))
    used = [(s, SLOT_INDEX[s]) for s in tabs]
    for s, k in used:
        slots[:, k] = c @ tabs[s][:, ii]
    p3 = pde.params3(mu)
    r = backend.residual_batch(pde.pde_id, slots, p3, grid.points[ii])
    dr = backend.residual_partials_batch(pde.pde_id, slots, p3, grid.points[ii])
    loss = w_r * float(r @ r) / ii.size
    wr = (2.0 * w_r / ii.size) * r
    for s, k in used:
        grad += tabs[s][:, ii] @ (wr * dr[:, k])

    if pde.ic is not None and grid.initial.size:
        ic = grid.initial
        x = grid.points[ic, 0]
        mis = c @ tabs["u"][:, ic] - pde.ic["u"](x)
        loss += w_i * float(mis @ mis) / ic.size
        grad += tabs["u"][:, ic] @ ((2.0 * w_i / ic.size) * mis)
        if "u_t" in pde.ic:
            mis_t = c @ tabs["u_t"][:, ic] - pde.ic["u_t"](x)
            loss += w_i * float(mis_t @ mis_t) / ic.size
            grad += tabs["u_t"][:, ic] @ ((2.0 * w_i / ic.size) * mis_t)

    if grid.boundary.size:
        if isinstance(pde.bc, DirichletBC):
            bi = grid.boundary
            mis = c @ tabs["u"][:, bi] - pde.bc.value(grid.points[bi])
            loss += w_b * float(mis @ mis) / bi.size
            grad += tabs["u"][:, bi] @ ((2.0 * w_b / bi.size) * mis)
        else:
            li, ri = grid.boundary_pairs[:, 0], grid.boundary_pairs[:, 1]
            tu = tabs["u"][:, li] - tabs["u"][:, ri]
            tx = tabs["u_x"][:, li] - tabs["u_x"][:, ri]
            du = c @ tu
            dux = c @ tx
            loss += w_b * (float(du @ du) + float(dux @ dux)) / li.size
            grad += tu @ ((2.0 * w_b / li.size) * du)
            grad += tx @ ((2.0 * w_b / li.size) * dux)

    return loss, grad


def train_online_gpt(full: FullTables, pde: PdeSpec, grid: CollocationGrid, mu,
                     c0: np.ndarray, config: OptimConfig,
                     optimizer: str = "gd",
                     loss_weights=(1.0, 1.0, 1.0)) -> MetaSolution:
    """Dense-baseline analogue of train_online (full-grid loss)."""
    mu = pde.validate_params(mu)

    def oracle(c):
        return gpt_loss_grad(c, full, pde, grid, mu, loss_weights)

    t0 = time.perf_counter()
    res = run_optimizer(optimizer, oracle, np.asarray(c0, dtype=float), config)
    seconds = time.perf_counter() - t0
    return MetaSolution(c=res.x, delta=res.loss, loss_history=res.loss_history,
                        seconds=seconds, converged=res.converged, flag=res.flag)


def reconstruct(c: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """Linear combination of stored full-grid columns: u = Σ c_i · col_i."""
    return np.asarray(columns) @ np.asarray(c, dtype=float)


def reconstruct_at(c: np.ndarray, basis: ReducedBasis, snapshots, points,
                   pde: PdeSpec) -> np.ndarray:
    """Fresh evaluation of Σ c_i ξ_i at arbitrary points via the raw networks."""
    c_raw = basis.beta.T @ np.asarray(c, dtype=float)
    out = np.zeros(np.asarray(points).shape[0])
    for w, snap in zip(c_raw, snapshots):
        if w == 0.0:
            continue
        jet = forward_jet(snap.params, points, ("u",), axes=pde.axes)
        out += w * jet["u"]
    return out
