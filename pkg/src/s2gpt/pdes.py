"""Benchmark PDE catalog.

Four parametric families in a uniform "slot" form: every residual is a
function of the field value and its input partial derivatives at one point
(see `slots.SLOT_NAMES`), so residual evaluation, loss assembly and grid
construction downstream are PDE-agnostic.

Families and parameter boxes:

    klein_gordon   u_tt + a·u_xx + b·u + g·u² + x·cos t − x²·cos²t = 0
                   (a, b, g) ∈ [−2,−1] × [0,1] × [0,1], (x,t) ∈ [−1,1]×[0,5]
    allen_cahn     u_t − l·u_xx + e·(u³−u) = 0, periodic in x
                   (l, e) ∈ [1e−4,1e−3] × [1,5], (x,t) ∈ [−1,1]×[0,1]
    burgers        u_t + u·u_x − v·u_xx = 0
                   v ∈ [0.005,1], (x,t) ∈ [−1,1]×[0,1]
    helmholtz      u_xx + u_yy + k²u = q(x,y), homogeneous Dirichlet,
                   manufactured solution (x²−1)(y²−1)sin(a1·πx)sin(a2·πy),
                   (a1, a2) ∈ [1,2] × [1,4], k a configured constant
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from . import backend
from .errors import GridError, ParameterDomainError, SlotError
from .slots import N_SLOTS, SLOT_INDEX, SLOT_NAMES


@dataclass(frozen=True)
class SlotVector:
    """Field value and input derivatives at one point; unused slots stay 0."""

    u: float = 0.0
    u_t: float = 0.0
    u_tt: float = 0.0
    u_x: float = 0.0
    u_xx: float = 0.0
    u_y: float = 0.0
    u_yy: float = 0.0

    def as_row(self) -> np.ndarray:
        return np.array([[self.u, self.u_t, self.u_tt, self.u_x,
                          self.u_xx, self.u_y, self.u_yy]])


@dataclass(frozen=True)
class DirichletBC:
    """u = value(points) on the spatial boundary."""

    value: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PeriodicBC:
    """Paired-endpoint matching of the listed slots (u, u_x)."""

    match_slots: tuple[str, ...] = ("u", "u_x")


@dataclass(frozen=True)
class GridResolution:
    """Interior tensor resolution plus initial/boundary point counts.

    For time-dependent problems `nb` is the interior resolution along t and
    `n_boundary` counts points per spatial boundary side. For the 2-D
    steady problem `nb` is the interior resolution along y, `n_initial`
    must be 0, and `n_boundary` counts points per box side.
    """

    na: int
    nb: int
    n_initial: int
    n_boundary: int

    def validate(self, time_dependent: bool):
        if self.na <= 0 or self.nb <= 0 or self.n_boundary <= 0:
            raise GridError(f"resolutions must be positive, got {self}")
        if time_dependent and self.n_initial <= 0:
            raise GridError("time-dependent grid needs n_initial > 0")
        if not time_dependent and self.n_initial != 0:
            raise GridError("steady grid must use n_initial = 0")


@dataclass(frozen=True)
class PdeDefaults:
    """Per-family defaults reproducing the reference experiment scales."""

    grid: GridResolution
    layers: tuple[int, ...]
    n_basis: int
    train_counts: tuple[int, ...]
    test_counts: tuple[int, ...]


@dataclass(frozen=True)
class PdeSpec:
    name: str
    pde_id: int
    spatial_dim: int
    time_dependent: bool
    axes: tuple[str, str]
    domain: tuple[tuple[float, float], tuple[float, float]]
    param_names: tuple[str, ...]
    param_box: tuple[tuple[float, float], ...]
    param_scales: tuple[str, ...]
    required_slots: tuple[str, ...]
    ic: Optional[dict]
    bc: object
    defaults: PdeDefaults
    exact: Optional[Callable] = None
    source: Optional[Callable] = None
    constants: dict = field(default_factory=dict)

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def params3(self, params) -> np.ndarray:
        """Kernel-facing padded parameter vector (Helmholtz k in slot 2)."""
        p = np.zeros(3)
        p[: self.n_params] = np.asarray(params, dtype=float)
        if self.name == "helmholtz":
            p[2] = self.constants["k"]
        return p

    def validate_params(self, params):
        params = np.atleast_1d(np.asarray(params, dtype=float))
        if params.shape != (self.n_params,):
            raise ParameterDomainError(
                f"{self.name} expects {self.n_params} parameters, got {params.shape}"
            )
        for v, (lo, hi), nm in zip(params, self.param_box, self.param_names):
            if not (lo <= v <= hi):
                raise ParameterDomainError(
                    f"{self.name}: {nm}={v} outside [{lo}, {hi}]"
                )
        return params

    def residual(self, slots: np.ndarray, params, coords: np.ndarray) -> np.ndarray:
        return backend.residual_batch(self.pde_id, slots, self.params3(params), coords)

    def residual_partials(self, slots: np.ndarray, params, coords: np.ndarray) -> np.ndarray:
        return backend.residual_partials_batch(
            self.pde_id, slots, self.params3(params), coords
        )


@dataclass(frozen=True)
class CollocationGrid:
    """Full collocation point list with disjoint interior/boundary/initial partitions."""

    points: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray
    initial: np.ndarray
    resolution: GridResolution
    pde_name: str
    # (nb, 2) paired boundary indices for periodic matching, else None
    boundary_pairs: Optional[np.ndarray] = None

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


# ---------------------------------------------------------------------------
# operations

def residual_eval(pde: PdeSpec, slots: SlotVector, params, point) -> float:
    """Strong-form residual at one point."""
    params = pde.validate_params(params)
    row = slots.as_row()
    if not np.all(np.isfinite(row)):
        raise SlotError(f"non-finite slot values: {slots}")
    coords = np.asarray(point, dtype=float).reshape(1, 2)
    return float(pde.residual(row, params, coords)[0])


def residual_partials(pde: PdeSpec, slots: SlotVector, params, point) -> dict:
    """Partial derivatives of the residual w.r.t. each slot, keyed by slot name."""
    params = pde.validate_params(params)
    row = slots.as_row()
    if not np.all(np.isfinite(row)):
        raise SlotError(f"non-finite slot values: {slots}")
    coords = np.asarray(point, dtype=float).reshape(1, 2)
    vals = pde.residual_partials(row, params, coords)[0]
    return {name: float(vals[i]) for i, name in enumerate(SLOT_NAMES)}


def helmholtz_source(params, k: float = 1.0) -> Callable:
    """Analytic q(x, y) with q = Δu + k²u of the manufactured solution."""
    a1, a2 = float(params[0]), float(params[1])
    if not (1.0 <= a1 <= 2.0 and 1.0 <= a2 <= 4.0):
        raise ParameterDomainError(f"(a1, a2)=({a1}, {a2}) outside [1,2]x[1,4]")

    def q(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return backend.helmholtz_q(np.ravel(x), np.ravel(y), a1, a2, k).reshape(x.shape)

    return q


def helmholtz_exact(params) -> Callable:
    a1, a2 = float(params[0]), float(params[1])

    def u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x * x - 1.0) * (y * y - 1.0) * np.sin(a1 * np.pi * x) * np.sin(a2 * np.pi * y)

    return u


def helmholtz_exact_jets(params, points: np.ndarray) -> dict:
    """Analytic slot tables of the manufactured solution at the given points."""
    a1, a2 = float(params[0]), float(params[1])
    x = points[:, 0]
    y = points[:, 1]
    pa, pb = a1 * np.pi, a2 * np.pi
    sx, cx = np.sin(pa * x), np.cos(pa * x)
    sy, cy = np.sin(pb * y), np.cos(pb * y)
    f = (x * x - 1.0) * sx
    fx = 2.0 * x * sx + pa * (x * x - 1.0) * cx
    fxx = 2.0 * sx + 4.0 * pa * x * cx - pa * pa * (x * x - 1.0) * sx
    g = (y * y - 1.0) * sy
    gy = 2.0 * y * sy + pb * (y * y - 1.0) * cy
    gyy = 2.0 * sy + 4.0 * pb * y * cy - pb * pb * (y * y - 1.0) * sy
    return {
        "u": f * g,
        "u_x": fx * g,
        "u_xx": fxx * g,
        "u_y": f * gy,
        "u_yy": f * gyy,
    }


def _interior_linspace(lo, hi, n):
    return np.linspace(lo, hi, n + 2)[1:-1]


def build_grid(pde: PdeSpec, resolution: Optional[GridResolution] = None) -> CollocationGrid:
    """Uniform tensor grid over the PDE domain with disjoint partitions.

    Time-dependent layout: `na × nb` interior points strictly inside
    Ω × (0, T] (T included), `n_initial` points on t = 0 excluding spatial
    endpoints, and `n_boundary` points per spatial side over t ∈ [0, T].
    Steady 2-D layout: `na × nb` interior points, `n_boundary` points per
    box side excluding corners.
    """
    res = resolution or pde.defaults.grid
    res.validate(pde.time_dependent)
    (x_lo, x_hi), (z_lo, z_hi) = pde.domain

    if pde.time_dependent:
        xs = _interior_linspace(x_lo, x_hi, res.na)
        ts = np.linspace(z_lo, z_hi, res.nb + 1)[1:]
        xx, tt = np.meshgrid(xs, ts, indexing="ij")
        interior_pts = np.column_stack([xx.ravel(), tt.ravel()])

        x0 = _interior_linspace(x_lo, x_hi, res.n_initial)
        initial_pts = np.column_stack([x0, np.full(res.n_initial, z_lo)])

        tb = np.linspace(z_lo, z_hi, res.n_boundary)
        left = np.column_stack([np.full(res.n_boundary, x_lo), tb])
        right = np.column_stack([np.full(res.n_boundary, x_hi), tb])
        boundary_pts = np.vstack([left, right])
        pairs = np.column_stack(
            [np.arange(res.n_boundary), res.n_boundary + np.arange(res.n_boundary)]
        )
    else:
        xs = _interior_linspace(x_lo, x_hi, res.na)
        ys = _interior_linspace(z_lo, z_hi, res.nb)
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        interior_pts = np.column_stack([xx.ravel(), yy.ravel()])

        initial_pts = np.zeros((0, 2))
        sb = _interior_linspace(x_lo, x_hi, res.n_boundary)
        bottom = np.column_stack([sb, np.full(res.n_boundary, z_lo)])
        top = np.column_stack([sb, np.full(res.n_boundary, z_hi)])
        left = np.column_stack([np.full(res.n_boundary, x_lo), sb])
        right = np.column_stack([np.full(res.n_boundary, x_hi), sb])
        boundary_pts = np.vstack([bottom, top, left, right])
        pairs = None

    points = np.vstack([interior_pts, boundary_pts, initial_pts])
    n_int = interior_pts.shape[0]
    n_bnd = boundary_pts.shape[0]
    n_ic = initial_pts.shape[0]
    interior = np.arange(n_int)
    bnd = n_int + np.arange(n_bnd)
    initial = n_int + n_bnd + np.arange(n_ic)
    if pairs is not None:
        pairs = pairs + n_int

    grid = CollocationGrid(
        points=points,
        interior=interior,
        boundary=bnd,
        initial=initial,
        resolution=res,
        pde_name=pde.name,
        boundary_pairs=pairs if isinstance(pde.bc, PeriodicBC) else None,
    )
    return grid


def _check_counts(pde: PdeSpec, counts) -> tuple:
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) != pde.n_params:
        raise ParameterDomainError(
            f"{pde.name} expects {pde.n_params} count entries, got {counts}"
        )
    return counts


def sample_parameter_grid(pde: PdeSpec, counts, scales=None, box=None) -> np.ndarray:
    """Tensor training grid over the parameter box, (n_points, n_params).

    Per-dimension spacing follows `scales` ('linear' or 'log'); the default
    uses the family's declared scales (log for the Allen-Cahn diffusion
    coefficient, which spans a decade). `box` restricts sampling to a sub-box.
    """
    counts = _check_counts(pde, counts)
    if any(c < 2 for c in counts):
        raise ParameterDomainError("need at least 2 samples per parameter dimension")
    scales = tuple(scales) if scales is not None else pde.param_scales
    box = tuple(box) if box is not None else pde.param_box
    axes = []
    for (lo, hi), c, sc in zip(box, counts, scales):
        if sc == "log":
            axes.append(np.logspace(np.log10(lo), np.log10(hi), c))
        else:
            axes.append(np.linspace(lo, hi, c))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def sample_test_parameters(pde: PdeSpec, counts, scales=None, box=None) -> np.ndarray:
    """Cell-midpoint tensor grid over the box; lands off any linspace nodes."""
    counts = _check_counts(pde, counts)
    scales = tuple(scales) if scales is not None else pde.param_scales
    box = tuple(box) if box is not None else pde.param_box
    axes = []
    for (lo, hi), c, sc in zip(box, counts, scales):
        if sc == "log":
            edges = np.logspace(np.log10(lo), np.log10(hi), c + 1)
            axes.append(np.sqrt(edges[:-1] * edges[1:]))
        else:
            edges = np.linspace(lo, hi, c + 1)
            axes.append(0.5 * (edges[:-1] + edges[1:]))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


# ---------------------------------------------------------------------------
# the four families

def _kg_bc(points):
    return points[:, 0] * np.cos(points[:, 1])


def _kg_ic(x):
    return x


def _zero_of(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zero_bc(points):
    return np.zeros(points.shape[0])


def _ac_ic(x):
    return x * x * np.cos(np.pi * x)


def _burgers_ic(x):
    return -np.sin(np.pi * x)


def klein_gordon() -> PdeSpec:
    return PdeSpec(
        name="klein_gordon",
        pde_id=0,
        spatial_dim=1,
        time_dependent=True,
        axes=("x", "t"),
        domain=((-1.0, 1.0), (0.0, 5.0)),
        param_names=("alpha", "beta", "gamma"),
        param_box=((-2.0, -1.0), (0.0, 1.0), (0.0, 1.0)),
        param_scales=("linear", "linear", "linear"),
        required_slots=("u_t", "u_tt", "u_xx"),
        ic={"u": _kg_ic, "u_t": _zero_of},
        bc=DirichletBC(_kg_bc),
        defaults=PdeDefaults(
            grid=GridResolution(104, 104, 104, 52),      # 104·104+104+2·52 = 11024
            layers=(2, 40, 40, 1),                       # 1801 weights+biases
            n_basis=12,
            train_counts=(6, 6, 6),
            test_counts=(5, 5, 4),
        ),
    )


def allen_cahn() -> PdeSpec:
    return PdeSpec(
        name="allen_cahn",
        pde_id=1,
        spatial_dim=1,
        time_dependent=True,
        axes=("x", "t"),
        domain=((-1.0, 1.0), (0.0, 1.0)),
        param_names=("lam", "eps"),
        param_box=((1e-4, 1e-3), (1.0, 5.0)),
        param_scales=("log", "linear"),
        required_slots=("u_t", "u_x", "u_xx"),
        ic={"u": _ac_ic},
        bc=PeriodicBC(("u", "u_x")),
        defaults=PdeDefaults(
            grid=GridResolution(142, 143, 142, 82),      # 142·143+142+2·82 = 20612
            layers=(2, 128, 128, 128, 128, 1),           # 50049
            n_basis=12,
            train_counts=(10, 10),
            test_counts=(10, 10),
        ),
    )


def burgers() -> PdeSpec:
    return PdeSpec(
        name="burgers",
        pde_id=2,
        spatial_dim=1,
        time_dependent=True,
        axes=("x", "t"),
        domain=((-1.0, 1.0), (0.0, 1.0)),
        param_names=("nu",),
        param_box=((0.005, 1.0),),
        param_scales=("linear",),
        required_slots=("u_t", "u_x", "u_xx"),
        ic={"u": _burgers_ic},
        bc=DirichletBC(_zero_bc),
        defaults=PdeDefaults(
            grid=GridResolution(100, 100, 100, 50),      # 100·100+100+2·50 = 10200
            layers=(2, 20, 20, 20, 20, 1),               # 1341
            n_basis=10,
            train_counts=(40,),
            test_counts=(100,),
        ),
    )


def helmholtz(k: float = 1.0) -> PdeSpec:
    return PdeSpec(
        name="helmholtz",
        pde_id=3,
        spatial_dim=2,
        time_dependent=False,
        axes=("x", "y"),
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        param_names=("a1", "a2"),
        param_box=((1.0, 2.0), (1.0, 4.0)),
        param_scales=("linear", "linear"),
        required_slots=("u_xx", "u_yy"),
        ic=None,
        bc=DirichletBC(_zero_bc),
        exact=helmholtz_exact,
        source=partial(helmholtz_source, k=k),
        constants={"k": float(k)},
        defaults=PdeDefaults(
            grid=GridResolution(256, 256, 0, 225),       # 256²+4·225 = 66436
            layers=(2, 20, 20, 20, 20, 1),               # 1341
            n_basis=24,
            train_counts=(8, 12),
            test_counts=(10, 10),
        ),
    )


PDE_FACTORIES = {
    "klein_gordon": klein_gordon,
    "allen_cahn": allen_cahn,
    "burgers": burgers,
    "helmholtz": helmholtz,
}


def get_pde(name: str, **options) -> PdeSpec:
    try:
        factory = PDE_FACTORIES[name]
    except KeyError:
        raise ParameterDomainError(
            f"unknown pde {name!r}; choices: {sorted(PDE_FACTORIES)}"
        ) from None
    return factory(**options)
