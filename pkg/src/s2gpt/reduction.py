"""Snapshot sparsification machinery.

Greedy interpolation on the snapshot family picks the "magic" points X_s and
the lower-triangular transform beta expressing the orthonormalized basis in
terms of raw snapshots; a second greedy pass over the snapshots' strong-form
residual fields picks the residual points X_r. Their union (size 2n−1 for an
n-term basis) is the only point set the online loss ever touches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (ConsistencyError, DegenerateResidualError,
                     DegenerateSnapshotError)
from .full_pinn import Snapshot
from .pdes import CollocationGrid, PdeSpec
from .slots import SLOT_INDEX

# post-orthogonalization max-abs below this fraction of the raw field's
# max-abs counts as "numerically in the span"
DEGENERACY_RTOL = 1e-10


@dataclass
class ReducedBasis:
    """Orthonormalized snapshot matrix with its point sets and transform."""

    n_grid: int
    xi: np.ndarray                 # (N_h, n) basis columns
    raw: np.ndarray                # (N_h, n) raw snapshot values
    beta: np.ndarray               # (n, n) lower-triangular transform
    magic_idx: list = field(default_factory=list)     # X_s, length n
    res_idx: list = field(default_factory=list)       # X_r, length n−1
    alphas: list = field(default_factory=list)        # per-step interpolation coefs
    res_basis: np.ndarray = None   # (N_h, n−1) orthogonalized residual fields
    mus: list = field(default_factory=list)

    @classmethod
    def empty(cls, n_grid: int) -> "ReducedBasis":
        return cls(
            n_grid=n_grid,
            xi=np.zeros((n_grid, 0)),
            raw=np.zeros((n_grid, 0)),
            beta=np.zeros((0, 0)),
            res_basis=np.zeros((n_grid, 0)),
        )

    @property
    def n(self) -> int:
        return self.xi.shape[1]

    def beta_row_sums(self) -> np.ndarray:
        return self.beta.sum(axis=1)


@dataclass
class GeimResult:
    index: int
    alpha: np.ndarray
    beta_row: np.ndarray
    scale: float


@dataclass
class EimResult:
    index: int
    alpha: np.ndarray
    scale: float


def _interp_coeffs(columns: np.ndarray, idx, values: np.ndarray) -> np.ndarray:
    """Solve the unit-lower-triangular interpolation system at the points idx."""
    k = len(idx)
    if k == 0:
        return np.zeros(0)
    m = columns[np.asarray(idx, dtype=int), :k]
    return solve_triangular(m, values[np.asarray(idx, dtype=int)],
                            lower=True, unit_diagonal=True)


def geim_step(basis: ReducedBasis, raw_snapshot: np.ndarray, mu=None,
              allowed=None) -> GeimResult:
    """Orthogonalize a raw snapshot against the basis at the magic points,
    pick the new magic point at the max-abs location (ties to the lowest
    index), normalize to value 1 there, and extend beta accordingly.

    `allowed` restricts the candidate indices; the greedy passes the interior
    partition so every sparse point supports the strong-form residual loss.
    """
    raw = np.asarray(raw_snapshot, dtype=float)
    if raw.shape != (basis.n_grid,):
        raise ValueError(f"snapshot length {raw.shape} != grid size {basis.n_grid}")
    n_prev = basis.n
    alpha = _interp_coeffs(basis.xi, basis.magic_idx, raw)
    rho = raw - basis.xi @ alpha if n_prev else raw.copy()
    if allowed is None:
        idx = int(np.argmax(np.abs(rho)))
    else:
        allowed = np.asarray(allowed, dtype=int)
        idx = int(allowed[np.argmax(np.abs(rho[allowed]))])
    scale = float(rho[idx])
    raw_mag = float(np.max(np.abs(raw)))
    if abs(scale) <= DEGENERACY_RTOL * max(raw_mag, 1e-300):
        raise DegenerateSnapshotError(
            f"snapshot at step {n_prev + 1} lies in the current span "
            f"(residual max {abs(scale):.3e} vs field max {raw_mag:.3e})"
        )
    xi_new = rho / scale
    beta_row = np.zeros(n_prev + 1)
    beta_row[n_prev] = 1.0
    if n_prev:
        beta_row[:n_prev] -= alpha @ basis.beta
    beta_row /= scale

    basis.xi = np.column_stack([basis.xi, xi_new])
    basis.raw = np.column_stack([basis.raw, raw])
    new_beta = np.zeros((n_prev + 1, n_prev + 1))
    new_beta[:n_prev, :n_prev] = basis.beta
    new_beta[n_prev] = beta_row
    basis.beta = new_beta
    basis.magic_idx.append(idx)
    basis.alphas.append(np.asarray(alpha))
    basis.mus.append(None if mu is None else np.asarray(mu, dtype=float))
    return GeimResult(index=idx, alpha=np.asarray(alpha), beta_row=beta_row,
                      scale=scale)


def residual_field(pde: PdeSpec, snapshot: Snapshot, grid: CollocationGrid,
                   mu=None) -> np.ndarray:
    """Strong-form residual of the snapshot on interior points, zero elsewhere."""
    mu = snapshot.mu if mu is None else mu
    slots = np.zeros((grid.n_points, 7))
    for slot, arr in snapshot.tables.items():
        slots[:, SLOT_INDEX[slot]] = arr
    out = np.zeros(grid.n_points)
    ii = grid.interior
    out[ii] = pde.residual(slots[ii], mu, grid.points[ii])
    return out


def eim_step(basis: ReducedBasis, new_residual: np.ndarray, excluded) -> EimResult:
    """Vanilla EIM step on the residual family with an excluded index set.

    Orthogonalizes against the stored residual basis at X_r, then takes the
    constrained argmax of the absolute field and normalizes to value 1 there.
    """
    r = np.asarray(new_residual, dtype=float)
    if r.shape != (basis.n_grid,):
        raise ValueError(f"residual length {r.shape} != grid size {basis.n_grid}")
    alpha = _interp_coeffs(basis.res_basis, basis.res_idx, r)
    rho = r - basis.res_basis @ alpha if len(basis.res_idx) else r.copy()
    mask = np.zeros(basis.n_grid, dtype=bool)
    mask[np.fromiter(excluded, dtype=int, count=-1)] = True
    scores = np.abs(rho)
    scores[mask] = -1.0
    idx = int(np.argmax(scores))
    scale = float(rho[idx])
    r_mag = float(np.max(np.abs(r)))
    if r_mag == 0.0 or abs(scale) <= DEGENERACY_RTOL * r_mag:
        raise DegenerateResidualError(
            f"residual field numerically zero outside exclusions "
            f"(max {abs(scale):.3e} vs field max {r_mag:.3e})"
        )
    basis.res_basis = np.column_stack([basis.res_basis, rho / scale])
    basis.res_idx.append(idx)
    return EimResult(index=idx, alpha=np.asarray(alpha), scale=scale)


def sparse_set(basis: ReducedBasis) -> np.ndarray:
    """Ordered sparse point list X_s then X_r; length 2n−1, duplicate-free.

    The length drops below 2n−1 only after a flagged degenerate-residual
    event; duplicates are an internal-consistency failure either way.
    """
    idx = np.asarray(list(basis.magic_idx) + list(basis.res_idx), dtype=int)
    if len(np.unique(idx)) != idx.size:
        raise ConsistencyError(f"duplicate sparse point in {idx.tolist()}")
    return idx
