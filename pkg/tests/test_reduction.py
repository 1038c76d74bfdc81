import numpy as np
import pytest

from s2gpt.errors import (ConsistencyError, DegenerateResidualError,
                          DegenerateSnapshotError)
from s2gpt.full_pinn import Snapshot, snapshot_tables
from s2gpt.diffnet import init_params
from s2gpt.pdes import GridResolution, build_grid, get_pde, helmholtz_exact_jets
from s2gpt.reduction import (ReducedBasis, eim_step, geim_step, residual_field,
                             sparse_set)

from oracles import brute_eim, brute_geim

GRID_X = np.linspace(-1.0, 1.0, 201)


def test_first_step_is_pure_normalization():
    psi = np.sin(2.3 * GRID_X) + 0.3
    basis = ReducedBasis.empty(GRID_X.size)
    res = geim_step(basis, psi)
    assert res.alpha.size == 0
    assert res.index == int(np.argmax(np.abs(psi)))
    assert basis.beta[0, 0] == pytest.approx(1.0 / psi[res.index], rel=1e-15)
    assert basis.xi[res.index, 0] == pytest.approx(1.0, abs=1e-15)


def test_monomial_family_interpolation_structure():
    raws = [np.ones_like(GRID_X), GRID_X.copy(), GRID_X ** 2]
    basis = ReducedBasis.empty(GRID_X.size)
    for r in raws:
        geim_step(basis, r)
    pts = basis.magic_idx
    # each basis function is 1 at its own point, 0 at all earlier points
    for j in range(3):
        for i in range(3):
            expected = 1.0 if i == j else (0.0 if i < j else None)
            if expected is not None:
                assert basis.xi[pts[i], j] == pytest.approx(expected, abs=1e-10)


def test_geim_agrees_with_brute_force_oracle():
    rng = np.random.default_rng(3)
    raws = [np.ones_like(GRID_X), GRID_X.copy(), GRID_X ** 2,
            np.sin(3 * GRID_X), np.cosh(GRID_X) - 1.2]
    basis = ReducedBasis.empty(GRID_X.size)
    for r in raws:
        geim_step(basis, r)
    oracle = brute_geim(raws)
    assert basis.magic_idx == oracle["points"]
    assert np.max(np.abs(basis.xi - oracle["xi"])) <= 1e-12
    for a, b in zip(basis.alphas, oracle["alphas"]):
        assert np.allclose(a, b, atol=1e-12)
    for i, row in enumerate(oracle["beta_rows"]):
        assert np.allclose(basis.beta[i, : i + 1], row, atol=1e-12)


def test_geim_restricted_candidates():
    psi = GRID_X.copy()  # max-abs at the endpoints
    allowed = np.arange(50, 151)
    basis = ReducedBasis.empty(GRID_X.size)
    res = geim_step(basis, psi, allowed=allowed)
    # |x| ties at the window edges (0.5 each side); lowest index wins
    assert res.index == 50


def test_degenerate_snapshot_rejected():
    basis = ReducedBasis.empty(GRID_X.size)
    geim_step(basis, np.sin(2 * GRID_X))
    geim_step(basis, np.cos(GRID_X))
    combo = 0.3 * basis.raw[:, 0] + 0.7 * basis.raw[:, 1]
    with pytest.raises(DegenerateSnapshotError):
        geim_step(basis, combo)
    assert basis.n == 2  # failed step leaves the basis untouched


def test_beta_reconstruction_invariant():
    rng = np.random.default_rng(9)
    raws = [rng.standard_normal(GRID_X.size) for _ in range(5)]
    basis = ReducedBasis.empty(GRID_X.size)
    for r in raws:
        geim_step(basis, r)
    recon = basis.raw @ basis.beta.T
    assert np.max(np.abs(recon - basis.xi)) <= 1e-10
    assert np.allclose(basis.beta, np.tril(basis.beta))


def test_unit_triangular_interpolation_invariant():
    rng = np.random.default_rng(11)
    raws = [np.sin((k + 1) * GRID_X) + 0.1 * rng.standard_normal(GRID_X.size)
            for k in range(5)]
    basis = ReducedBasis.empty(GRID_X.size)
    for r in raws:
        geim_step(basis, r)
    m = basis.xi[np.asarray(basis.magic_idx)]
    assert np.max(np.abs(np.triu(m) - np.eye(5))) <= 1e-10


# ---------------------------------------------------------------------------
# EIM on residual families

def test_first_eim_call_constrained_argmax():
    r = np.exp(-8.0 * (GRID_X - 0.3) ** 2) + 0.5 * np.exp(-8.0 * (GRID_X + 0.6) ** 2)
    basis = ReducedBasis.empty(GRID_X.size)
    true_max = int(np.argmax(np.abs(r)))
    res = eim_step(basis, r, excluded={true_max})
    assert res.index != true_max
    # with the peak excluded, one of its immediate neighbors wins
    assert res.index in (true_max - 1, true_max + 1)


def test_sine_family_matches_brute_force():
    fields = [np.sin((k + 1) * np.pi * GRID_X) for k in range(3)]
    basis = ReducedBasis.empty(GRID_X.size)
    excluded = [set(), set(), set()]
    for f, ex in zip(fields, excluded):
        eim_step(basis, f, ex)
    oracle = brute_eim(fields, excluded)
    assert basis.res_idx == oracle["points"]
    assert np.max(np.abs(basis.res_basis - oracle["basis"])) <= 1e-12
    # orthogonalized residuals vanish at all earlier residual points
    for j in range(1, 3):
        for i in range(j):
            assert abs(basis.res_basis[basis.res_idx[i], j]) <= 1e-12


def test_degenerate_residual_rejected():
    basis = ReducedBasis.empty(GRID_X.size)
    eim_step(basis, np.sin(np.pi * GRID_X), set())
    with pytest.raises(DegenerateResidualError):
        eim_step(basis, 0.5 * basis.res_basis[:, 0], set())
    with pytest.raises(DegenerateResidualError):
        eim_step(basis, np.zeros(GRID_X.size), set())


def test_exclusion_forces_second_best():
    r = np.zeros(GRID_X.size)
    r[10] = 5.0
    r[20] = 4.0
    basis = ReducedBasis.empty(GRID_X.size)
    res = eim_step(basis, r, excluded={10})
    assert res.index == 20


# ---------------------------------------------------------------------------
# residual fields and the sparse set

def test_residual_field_zero_network(burgers_small_grid):
    pde, grid = burgers_small_grid
    params = init_params((2, 8, 1), 0)
    for w in params.weights:
        w[:] = 0.0
    snap = Snapshot(mu=np.array([0.5]), params=params, loss=0.0,
                    tables=snapshot_tables(params, grid, pde))
    r = residual_field(pde, snap, grid)
    assert np.all(r == 0.0)


def test_residual_field_exact_helmholtz():
    pde = get_pde("helmholtz")
    grid = build_grid(pde, GridResolution(15, 15, 0, 8))
    params = init_params((2, 8, 1), 0)
    tables = helmholtz_exact_jets([1.5, 2.5], grid.points)
    snap = Snapshot(mu=np.array([1.5, 2.5]), params=params, loss=0.0,
                    tables=tables)
    r = residual_field(pde, snap, grid)
    assert np.max(np.abs(r)) <= 1e-10
    assert np.all(r[grid.boundary] == 0.0)


def test_residual_field_boundary_and_initial_zeroed(burgers_small_grid):
    pde, grid = burgers_small_grid
    params = init_params((2, 8, 8, 1), 1)
    snap = Snapshot(mu=np.array([0.5]), params=params, loss=0.0,
                    tables=snapshot_tables(params, grid, pde))
    r = residual_field(pde, snap, grid)
    assert np.all(r[grid.boundary] == 0.0)
    assert np.all(r[grid.initial] == 0.0)
    assert np.any(r[grid.interior] != 0.0)


def test_sparse_set_sizes():
    rng = np.random.default_rng(5)
    basis = ReducedBasis.empty(GRID_X.size)
    for k in range(4):
        geim_step(basis, np.sin((k + 1.3) * GRID_X) + 0.05 * rng.standard_normal(GRID_X.size))
        if k > 0:
            r = np.cos((k + 0.7) * GRID_X) + 0.05 * rng.standard_normal(GRID_X.size)
            eim_step(basis, r, excluded=set(sparse_set(basis).tolist()))
        assert sparse_set(basis).size == 2 * (k + 1) - 1
    assert sparse_set(basis).size == 7


def test_sparse_set_single_function():
    basis = ReducedBasis.empty(GRID_X.size)
    geim_step(basis, np.sin(GRID_X))
    xm = sparse_set(basis)
    assert xm.tolist() == [basis.magic_idx[0]]


def test_sparse_set_duplicate_detection():
    basis = ReducedBasis.empty(GRID_X.size)
    geim_step(basis, np.sin(GRID_X))
    basis.res_idx.append(basis.magic_idx[0])
    with pytest.raises(ConsistencyError):
        sparse_set(basis)


def test_reference_widths_give_reference_sparse_sizes():
    # width N -> sparse size 2N-1 for the four shipped configurations
    widths = {"klein_gordon": 12, "allen_cahn": 12, "burgers": 10, "helmholtz": 24}
    sparse = {"klein_gordon": 23, "allen_cahn": 23, "burgers": 19, "helmholtz": 47}
    for name, n in widths.items():
        assert get_pde(name).defaults.n_basis == n
        assert 2 * n - 1 == sparse[name]
