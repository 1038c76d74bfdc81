"""Small tanh MLPs with exact input-derivative jets and manual weight gradients.

Forward pass propagates, per input axis, the triple (value, first directional
derivative, second directional derivative) through every layer: affine layers
map jets linearly, tanh maps them through

    v = tanh(z),  v' = (1−v²)z',  v'' = (1−v²)z'' − 2v(1−v²)(z')².

The five streams (value, d/dx, d²/dx², d/dz, d²/dz²) are stacked into one
(5, P, n) array so each layer is a single GEMM plus one fused elementwise
kernel. The physics loss is assembled from the output jets, and its gradient
over all weights and biases comes from reverse accumulation through the same
computation (no computational-graph framework involved).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import backend
from .errors import SlotError
from .pdes import CollocationGrid, DirichletBC, PdeSpec
from .slots import SLOT_INDEX, SLOT_JET

# points per forward/reverse block; bounds tape memory at wide layers
CHUNK = 2048

# stream order in the stacked jet state
VAL, D0, S0, D1, S1 = range(5)

_SLOT_STREAM = {"u": VAL, "u_x": D0, "u_xx": S0, "u_t": D1, "u_tt": S1,
                "u_y": D1, "u_yy": S1}


@dataclass
class MlpParams:
    """Layer sizes plus per-layer weight matrices W (n_out, n_in) and biases b."""

    sizes: tuple[int, ...]
    weights: list
    biases: list

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flatten(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, sizes: Sequence[int], vec: np.ndarray) -> "MlpParams":
        sizes = tuple(int(s) for s in sizes)
        weights, biases = [], []
        k = 0
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            weights.append(vec[k: k + n_in * n_out].reshape(n_out, n_in).copy())
            k += n_in * n_out
            biases.append(vec[k: k + n_out].copy())
            k += n_out
        if k != vec.size:
            raise ValueError(f"flat vector length {vec.size} mismatches sizes {sizes}")
        return cls(sizes=sizes, weights=weights, biases=biases)

    def copy(self) -> "MlpParams":
        return MlpParams(
            sizes=self.sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class Jet:
    """Per-point field value and requested derivative slots as flat arrays."""

    points: np.ndarray
    data: dict

    def __getitem__(self, slot: str) -> np.ndarray:
        return self.data[slot]

    def slots(self) -> tuple:
        return tuple(self.data.keys())


def param_count(sizes: Sequence[int]) -> int:
    return sum(n_out * (n_in + 1) for n_in, n_out in zip(sizes[:-1], sizes[1:]))


def init_params(sizes: Sequence[int], seed: int) -> MlpParams:
    """Scaled-uniform (Glorot) weights, zero biases, deterministic per seed."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2 or any(s <= 0 for s in sizes):
        raise ValueError(f"invalid layer sizes {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-lim, lim, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MlpParams(sizes=sizes, weights=weights, biases=biases)


class _Workspace:
    """Preallocated forward-tape and reverse buffers for one (sizes, P) shape.

    Oracles call the forward/reverse pair thousands of times with identical
    shapes; reusing buffers avoids large-allocation churn that otherwise
    dominates the runtime.
    """

    def __init__(self, sizes, p):
        self.p = p
        # z[0] is the input jet block; z[k] the output of hidden layer k-1
        self.z = [np.zeros((5, p, sizes[0]))]
        self.z += [np.empty((5, p, w)) for w in sizes[1:-1]]
        self.a = [np.empty((5, p, w)) for w in sizes[1:-1]]
        self.out = np.empty((5, p, sizes[-1]))
        self.ga = [np.empty((5, p, w)) for w in sizes[1:-1]]
        self.gz = [None] + [np.empty((5, p, w)) for w in sizes[1:-1]]


_tls = threading.local()


def _workspace(sizes, p) -> _Workspace:
    cache = getattr(_tls, "cache", None)
    if cache is None:
        cache = _tls.cache = {}
    ws = cache.get((sizes, p))
    if ws is None:
        ws = cache[(sizes, p)] = _Workspace(sizes, p)
    return ws


def _mm(z, w, out):
    p = z.shape[1]
    np.matmul(z.reshape(5 * p, -1), w.T, out=out.reshape(5 * p, -1))
    return out


def _forward(params: MlpParams, x: np.ndarray, ws: _Workspace):
    """Jet forward pass over one block; returns the (5, P) output streams.

    The returned array views workspace memory: consume it before the next
    forward call with the same workspace.
    """
    p = x.shape[0]
    z0 = ws.z[0]
    z0[VAL] = x
    z0[D0, :, 0] = 1.0
    z0[D1, :, 1] = 1.0
    n_hidden = len(params.weights) - 1
    for ell in range(n_hidden):
        a = _mm(ws.z[ell], params.weights[ell], ws.a[ell])
        a[VAL] += params.biases[ell]
        backend.tanh_jet_forward(a, ws.z[ell + 1])
    out = _mm(ws.z[n_hidden], params.weights[-1], ws.out)
    out[VAL] += params.biases[-1]
    return out[:, :, 0]


def _reverse(params: MlpParams, ws: _Workspace, seeds, gw, gb):
    """Accumulate weight/bias gradients for one block given output-stream seeds."""
    p = seeds.shape[1]
    n_hidden = len(params.weights) - 1
    g = seeds.reshape(5, p, 1)
    gw[-1] += g.reshape(5 * p, 1).T @ ws.z[n_hidden].reshape(5 * p, -1)
    gb[-1] += g[VAL].sum(axis=0)
    gz = _mm(g, params.weights[-1].T, ws.gz[n_hidden])
    for ell in range(n_hidden - 1, -1, -1):
        ga = backend.tanh_jet_backward(ws.z[ell + 1], ws.a[ell], gz, ws.ga[ell])
        gw[ell] += ga.reshape(5 * p, -1).T @ ws.z[ell].reshape(5 * p, -1)
        gb[ell] += ga[VAL].sum(axis=0)
        if ell > 0:
            gz = _mm(ga, params.weights[ell].T, ws.gz[ell])


def forward_jet(params: MlpParams, points: np.ndarray, request: Sequence[str],
                axes: tuple[str, str] = ("x", "t")) -> Jet:
    """Network value and exact input derivatives at a batch of points.

    `request` lists slot names ('u', 'u_x', 'u_xx', and 'u_t'/'u_tt' or
    'u_y'/'u_yy' depending on `axes`). Derivatives are computed by jet
    propagation, not finite differences.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError(f"points must be (P, 2), got {points.shape}")
    for slot in request:
        if slot not in SLOT_JET:
            raise SlotError(f"unknown slot {slot!r}")
        if slot in ("u_t", "u_tt") and axes[1] != "t":
            raise SlotError(f"slot {slot!r} not available on axes {axes}")
        if slot in ("u_y", "u_yy") and axes[1] != "y":
            raise SlotError(f"slot {slot!r} not available on axes {axes}")
    arrays = {sl: np.empty(points.shape[0]) for sl in request}
    for start in range(0, points.shape[0], CHUNK):
        block = points[start: start + CHUNK]
        out = _forward(params, block, _workspace(params.sizes, block.shape[0]))
        for sl in request:
            arrays[sl][start: start + block.shape[0]] = out[_SLOT_STREAM[sl]]
    return Jet(points=points, data=arrays)


# ---------------------------------------------------------------------------
# full PINN loss

def _interior_seeds(pde, out, block, mu3, scale, n_total):
    """Loss contribution and output-stream seeds for interior points."""
    slots = np.zeros((block.shape[0], 7))
    for slot in ("u",) + tuple(pde.required_slots):
        slots[:, SLOT_INDEX[slot]] = out[_SLOT_STREAM[slot]]
    r = backend.residual_batch(pde.pde_id, slots, mu3, block)
    dr = backend.residual_partials_batch(pde.pde_id, slots, mu3, block)
    w = (2.0 * scale / n_total) * r
    seeds = np.zeros((5, block.shape[0]))
    for slot in ("u",) + tuple(pde.required_slots):
        seeds[_SLOT_STREAM[slot]] += w * dr[:, SLOT_INDEX[slot]]
    return float(r @ r), seeds


def pinn_loss_grad(params: MlpParams, pde: PdeSpec, grid: CollocationGrid, mu,
                   loss_weights=(1.0, 1.0, 1.0), want_grad: bool = True):
    """Full physics loss and its exact gradient over every weight and bias.

    loss = w_r·mean(residual²) over interior + w_i·mean(IC mismatch²) over
    the initial slice (including the u_t condition when the PDE declares
    one) + w_b·mean(BC mismatch²) over the boundary.
    """
    mu = pde.validate_params(mu)
    mu3 = pde.params3(mu)
    w_r, w_i, w_b = loss_weights
    gw = [np.zeros_like(w) for w in params.weights] if want_grad else None
    gb = [np.zeros_like(b) for b in params.biases] if want_grad else None

    # interior, chunked
    n_int = grid.interior.size
    pts_int = grid.points[: n_int]
    acc = 0.0
    for start in range(0, n_int, CHUNK):
        block = pts_int[start: start + CHUNK]
        ws = _workspace(params.sizes, block.shape[0])
        out = _forward(params, block, ws)
        part, seeds = _interior_seeds(pde, out, block, mu3, w_r, n_int)
        acc += part
        if want_grad:
            _reverse(params, ws, seeds, gw, gb)
    loss = w_r * acc / n_int

    # boundary + initial in one pass (contiguous tail of the point list)
    rest = grid.points[n_int:]
    if rest.shape[0]:
        ws = _workspace(params.sizes, rest.shape[0])
        out = _forward(params, rest, ws)
        seeds = np.zeros((5, rest.shape[0]))
        nb = grid.boundary.size
        if nb:
            if isinstance(pde.bc, DirichletBC):
                mis = out[VAL, :nb] - pde.bc.value(rest[:nb])
                loss += w_b * float(mis @ mis) / nb
                seeds[VAL, :nb] += (2.0 * w_b / nb) * mis
            else:
                pairs = grid.boundary_pairs - n_int
                li, ri = pairs[:, 0], pairs[:, 1]
                du = out[VAL, li] - out[VAL, ri]
                dux = out[D0, li] - out[D0, ri]
                npair = li.size
                loss += w_b * (float(du @ du) + float(dux @ dux)) / npair
                w2 = 2.0 * w_b / npair
                np.add.at(seeds[VAL], li, w2 * du)
                np.add.at(seeds[VAL], ri, -w2 * du)
                np.add.at(seeds[D0], li, w2 * dux)
                np.add.at(seeds[D0], ri, -w2 * dux)
        ni = grid.initial.size
        if ni and pde.ic is not None:
            sl = slice(nb, nb + ni)
            x = rest[sl, 0]
            mis = out[VAL, sl] - pde.ic["u"](x)
            part = float(mis @ mis)
            seeds[VAL, sl] += (2.0 * w_i / ni) * mis
            if "u_t" in pde.ic:
                mis_t = out[D1, sl] - pde.ic["u_t"](x)
                part += float(mis_t @ mis_t)
                seeds[D1, sl] += (2.0 * w_i / ni) * mis_t
            loss += w_i * part / ni
        if want_grad:
            _reverse(params, ws, seeds, gw, gb)

    if not want_grad:
        return loss, None
    flat = np.concatenate([np.concatenate([w.ravel(), np.atleast_1d(b)])
                           for w, b in zip(gw, gb)])
    return loss, flat


def loss_from_tables(tables: dict, pde: PdeSpec, grid: CollocationGrid, mu,
                     loss_weights=(1.0, 1.0, 1.0)) -> float:
    """The same physics loss evaluated from precomputed full-grid slot tables.

    `tables` maps slot name -> (N_h,) array; used for oracle checks against
    analytic jets and for combined fields.
    """
    mu = pde.validate_params(mu)
    w_r, w_i, w_b = loss_weights
    slots = np.zeros((grid.n_points, 7))
    for slot, arr in tables.items():
        slots[:, SLOT_INDEX[slot]] = arr
    ii = grid.interior
    r = backend.residual_batch(pde.pde_id, slots[ii], pde.params3(mu),
                               grid.points[ii])
    loss = w_r * float(r @ r) / ii.size
    if pde.ic is not None and grid.initial.size:
        x = grid.points[grid.initial, 0]
        mis = tables["u"][grid.initial] - pde.ic["u"](x)
        acc = float(mis @ mis)
        if "u_t" in pde.ic:
            mis_t = tables["u_t"][grid.initial] - pde.ic["u_t"](x)
            acc += float(mis_t @ mis_t)
        loss += w_i * acc / grid.initial.size
    if grid.boundary.size:
        if isinstance(pde.bc, DirichletBC):
            mis = tables["u"][grid.boundary] - pde.bc.value(grid.points[grid.boundary])
            loss += w_b * float(mis @ mis) / grid.boundary.size
        else:
            li, ri = grid.boundary_pairs[:, 0], grid.boundary_pairs[:, 1]
            du = tables["u"][li] - tables["u"][ri]
            dux = tables["u_x"][li] - tables["u_x"][ri]
            loss += w_b * (float(du @ du) + float(dux @ dux)) / li.size
    return loss
