import numpy as np
import pytest

from s2gpt.diffnet import (Jet, MlpParams, forward_jet, init_params,
                           loss_from_tables, param_count, pinn_loss_grad)
from s2gpt.errors import SlotError
from s2gpt.pdes import (GridResolution, build_grid, get_pde,
                        helmholtz_exact_jets)

from oracles import grad_check


def test_param_counts_match_reference_sizes():
    assert param_count((2, 20, 20, 20, 20, 1)) == 1341
    assert param_count((2, 128, 128, 128, 128, 1)) == 50049
    assert param_count((2, 40, 40, 1)) == 1801
    p = init_params((2, 20, 20, 20, 20, 1), 0)
    assert p.n_params == 1341


def test_init_deterministic():
    a = init_params((2, 20, 20, 1), 7)
    b = init_params((2, 20, 20, 1), 7)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    c = init_params((2, 20, 20, 1), 8)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_init_bounds_and_zero_bias():
    p = init_params((2, 20, 1), 3)
    lim0 = np.sqrt(6.0 / 22.0)
    assert np.max(np.abs(p.weights[0])) <= lim0
    assert np.all(p.biases[0] == 0.0)


def test_flatten_round_trip():
    p = init_params((2, 7, 5, 1), 1)
    q = MlpParams.from_flat(p.sizes, p.flatten())
    for wa, wb in zip(p.weights, q.weights):
        assert np.array_equal(wa, wb)
    for ba, bb in zip(p.biases, q.biases):
        assert np.array_equal(ba, bb)


def test_zero_network_zero_jets():
    p = init_params((2, 10, 1), 0)
    for w in p.weights:
        w[:] = 0.0
    pts = np.random.default_rng(0).uniform(-1, 1, size=(40, 2))
    jet = forward_jet(p, pts, ("u", "u_x", "u_xx", "u_t", "u_tt"))
    for slot in jet.slots():
        assert np.all(jet[slot] == 0.0)


def test_single_unit_analytic_tanh():
    # u(x,t) = tanh(x): frozen values from the analytic derivative formulas
    p = MlpParams(sizes=(2, 1, 1),
                  weights=[np.array([[1.0, 0.0]]), np.array([[1.0]])],
                  biases=[np.zeros(1), np.zeros(1)])
    jet = forward_jet(p, np.array([[0.5, 0.3]]), ("u", "u_x", "u_xx"))
    assert jet["u"][0] == pytest.approx(0.46211715726000974, abs=1e-15)
    assert jet["u_x"][0] == pytest.approx(0.7864477329659274, abs=1e-12)
    assert jet["u_xx"][0] == pytest.approx(-0.7268619813835874, abs=1e-12)


def test_jets_match_finite_differences(rng):
    # criterion-level check: 10 random networks x 200 points, all slots
    h = 1e-4
    for trial in range(10):
        sizes = (2, 16, 16, 1) if trial % 2 else (2, 12, 12, 12, 1)
        params = init_params(sizes, 100 + trial)
        flat = params.flatten() + 0.2 * rng.standard_normal(params.n_params)
        params = MlpParams.from_flat(sizes, flat)
        pts = rng.uniform(-1, 1, size=(200, 2))
        jet = forward_jet(params, pts, ("u", "u_x", "u_xx", "u_t", "u_tt"))

        def val(q):
            return forward_jet(params, q, ("u",))["u"]

        for slot, axis, order in [("u_x", 0, 1), ("u_xx", 0, 2),
                                  ("u_t", 1, 1), ("u_tt", 1, 2)]:
            e = np.zeros(2)
            e[axis] = h
            if order == 1:
                fd = (val(pts + e) - val(pts - e)) / (2 * h)
            else:
                fd = (val(pts + e) - 2 * val(pts) + val(pts - e)) / h**2
            scale = max(1.0, float(np.max(np.abs(jet[slot]))))
            assert np.max(np.abs(fd - jet[slot])) <= 1e-6 * scale, (trial, slot)


def test_final_layer_homogeneity(rng):
    # scaling the output layer scales every jet stream by the same factor
    params = init_params((2, 14, 14, 1), 5)
    pts = rng.uniform(-1, 1, size=(50, 2))
    base = forward_jet(params, pts, ("u", "u_x", "u_xx", "u_t", "u_tt"))
    scaled = params.copy()
    scaled.weights[-1] *= 3.5
    scaled.biases[-1] *= 3.5
    out = forward_jet(scaled, pts, ("u", "u_x", "u_xx", "u_t", "u_tt"))
    for slot in base.slots():
        assert np.allclose(out[slot], 3.5 * base[slot], rtol=1e-13, atol=1e-13)


def test_axis_request_validation():
    params = init_params((2, 8, 1), 0)
    pts = np.zeros((3, 2))
    with pytest.raises(SlotError):
        forward_jet(params, pts, ("u", "u_y"), axes=("x", "t"))
    with pytest.raises(SlotError):
        forward_jet(params, pts, ("u_t",), axes=("x", "y"))
    jet = forward_jet(params, pts, ("u", "u_y", "u_yy"), axes=("x", "y"))
    assert set(jet.slots()) == {"u", "u_y", "u_yy"}


@pytest.mark.parametrize("name,res,mu", [
    ("burgers", GridResolution(12, 11, 10, 6), [0.4]),
    ("klein_gordon", GridResolution(12, 11, 10, 6), [-1.5, 0.3, 0.7]),
    ("allen_cahn", GridResolution(12, 11, 10, 6), [5e-4, 2.0]),
    ("helmholtz", GridResolution(12, 11, 0, 6), [1.3, 2.2]),
])
def test_loss_grad_matches_finite_differences(name, res, mu, rng):
    pde = get_pde(name)
    grid = build_grid(pde, res)
    params = init_params((2, 12, 12, 1), 5)
    flat = params.flatten() + 0.1 * rng.standard_normal(params.n_params)
    params = MlpParams.from_flat(params.sizes, flat)
    loss, grad = pinn_loss_grad(params, pde, grid, mu)
    assert np.isfinite(loss) and loss > 0

    def loss_at(v):
        return pinn_loss_grad(MlpParams.from_flat(params.sizes, v), pde, grid,
                              mu, want_grad=False)[0]

    coords = rng.choice(flat.size, size=20, replace=False)
    assert grad_check(loss_at, flat, grad, coords, loss_scale=loss) <= 1e-5


def test_loss_weights_scale_terms(burgers_small_grid):
    pde, grid = burgers_small_grid
    params = init_params((2, 10, 1), 2)
    base, _ = pinn_loss_grad(params, pde, grid, [0.5], want_grad=False)
    doubled, _ = pinn_loss_grad(params, pde, grid, [0.5],
                                loss_weights=(2.0, 2.0, 2.0), want_grad=False)
    assert doubled == pytest.approx(2.0 * base, rel=1e-12)


def test_zero_network_burgers_ic_term(burgers_small_grid):
    # zero net: interior and boundary terms vanish; IC term = mean sin²(πx)
    pde, grid = burgers_small_grid
    params = init_params((2, 10, 1), 0)
    for w in params.weights:
        w[:] = 0.0
    loss, _ = pinn_loss_grad(params, pde, grid, [0.5], want_grad=False)
    x = grid.points[grid.initial, 0]
    expected = float(np.mean(np.sin(np.pi * x) ** 2))
    assert loss == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.5, abs=0.06)


def test_helmholtz_exact_jets_give_zero_loss():
    # the manufactured solution satisfies residual and BC identically, so the
    # loss evaluated from its analytic jet tables vanishes
    pde = get_pde("helmholtz")
    grid = build_grid(pde, GridResolution(20, 20, 0, 10))
    tables = helmholtz_exact_jets([1.95, 3.95], grid.points)
    loss = loss_from_tables(tables, pde, grid, [1.95, 3.95])
    assert loss <= 1e-10


def test_klein_gordon_ic_includes_time_derivative(burgers_small_grid):
    pde = get_pde("klein_gordon")
    grid = build_grid(pde, GridResolution(10, 10, 8, 5))
    params = init_params((2, 10, 1), 3)
    # tables route must agree with the network route on the same loss
    from s2gpt.full_pinn import snapshot_tables
    tables = snapshot_tables(params, grid, pde)
    via_tables = loss_from_tables(tables, pde, grid, [-1.5, 0.5, 0.5])
    via_net, _ = pinn_loss_grad(params, pde, grid, [-1.5, 0.5, 0.5], want_grad=False)
    assert via_tables == pytest.approx(via_net, rel=1e-12)


def test_periodic_bc_term(rng):
    pde = get_pde("allen_cahn")
    grid = build_grid(pde, GridResolution(10, 10, 8, 5))
    params = init_params((2, 10, 10, 1), 4)
    mu = [5e-4, 3.0]
    loss, grad = pinn_loss_grad(params, pde, grid, mu)

    def loss_at(v):
        return pinn_loss_grad(MlpParams.from_flat(params.sizes, v), pde, grid,
                              mu, want_grad=False)[0]

    flat = params.flatten()
    coords = rng.choice(flat.size, size=15, replace=False)
    assert grad_check(loss_at, flat, grad, coords, loss_scale=loss) <= 1e-5
