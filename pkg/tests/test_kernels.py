"""Backend equivalence: the numba kernels must reproduce the numpy fallback."""

import subprocess
import sys

import numpy as np
import pytest

from s2gpt import _kernels_numpy as knp

knb = pytest.importorskip("s2gpt._kernels_numba")

PDES = [0, 1, 2, 3]


def make_inputs(rng, p=257):
    slots = rng.standard_normal((p, 7))
    coords = rng.uniform(-1, 1, size=(p, 2))
    coords[:, 1] = rng.uniform(0, 2, size=p)
    params = np.array([rng.uniform(0.1, 1.5), rng.uniform(0.5, 3.0), 1.2])
    return slots, params, coords


@pytest.mark.parametrize("pde_id", PDES)
def test_residual_batch_equivalence(pde_id, rng):
    slots, params, coords = make_inputs(rng)
    a = knp.residual_batch(pde_id, slots, params, coords)
    b = knb.residual_batch(pde_id, slots, params, coords)
    assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, np.max(np.abs(a)))


@pytest.mark.parametrize("pde_id", PDES)
def test_residual_partials_equivalence(pde_id, rng):
    slots, params, coords = make_inputs(rng)
    a = knp.residual_partials_batch(pde_id, slots, params, coords)
    b = knb.residual_partials_batch(pde_id, slots, params, coords)
    assert np.array_equal(a, b)


def test_helmholtz_source_equivalence(rng):
    x = rng.uniform(-1, 1, 300)
    y = rng.uniform(-1, 1, 300)
    a = knp.helmholtz_q(x, y, 1.7, 3.2, 1.0)
    b = knb.helmholtz_q(x, y, 1.7, 3.2, 1.0)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_tanh_jet_forward_equivalence(rng):
    a = rng.standard_normal((5, 123, 17))
    o1 = knp.tanh_jet_forward(a, np.empty_like(a))
    o2 = knb.tanh_jet_forward(a, np.empty_like(a))
    assert np.max(np.abs(o1 - o2)) <= 1e-15


def test_tanh_jet_backward_equivalence(rng):
    a = rng.standard_normal((5, 123, 17))
    t = knp.tanh_jet_forward(a, np.empty_like(a))
    g = rng.standard_normal((5, 123, 17))
    o1 = knp.tanh_jet_backward(t, a, g, np.empty_like(g))
    o2 = knb.tanh_jet_backward(t, a, g, np.empty_like(g))
    assert np.max(np.abs(o1 - o2)) <= 1e-13


@pytest.mark.parametrize("pde_id", PDES)
def test_sparse_loss_grad_equivalence(pde_id, rng):
    n, m = 6, 11
    tables = rng.standard_normal((7, n, m))
    c = rng.standard_normal(n)
    srow = rng.standard_normal(n)
    params = np.array([0.7, 1.3, 1.1])
    coords = rng.uniform(-1, 1, size=(m, 2))
    l1, g1 = knp.sparse_loss_grad(pde_id, tables, c, srow, params, coords)
    l2, g2 = knb.sparse_loss_grad(pde_id, tables, c, srow, params, coords)
    assert l1 == pytest.approx(l2, rel=1e-12)
    assert np.max(np.abs(g1 - g2)) <= 1e-11 * max(1.0, np.max(np.abs(g1)))


def test_backend_env_selection():
    code = ("import os; os.environ['S2GPT_BACKEND']='numpy'; "
            "import s2gpt.backend as b; print(b.backend_name())")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "numpy"
    code = ("import os; os.environ['S2GPT_BACKEND']='numba'; "
            "import s2gpt.backend as b; print(b.backend_name())")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_backend_bad_value_rejected():
    code = ("import os; os.environ['S2GPT_BACKEND']='cuda'; "
            "import s2gpt.backend")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True)
    assert out.returncode != 0
    assert "S2GPT_BACKEND" in out.stderr


def test_numpy_backend_full_pipeline_close():
    # one tiny loss/grad evaluated through both backends end to end
    code = """
import os
os.environ['S2GPT_BACKEND'] = '{be}'
import numpy as np
from s2gpt.pdes import get_pde, build_grid, GridResolution
from s2gpt.diffnet import init_params, pinn_loss_grad
pde = get_pde('burgers')
grid = build_grid(pde, GridResolution(8, 8, 6, 4))
params = init_params((2, 8, 8, 1), 3)
loss, grad = pinn_loss_grad(params, pde, grid, [0.5])
np.save('/tmp/_be_{be}.npy', np.concatenate([[loss], grad]))
"""
    for be in ("numpy", "numba"):
        subprocess.run([sys.executable, "-c", code.format(be=be)], check=True)
    a = np.load("/tmp/_be_numpy.npy")
    b = np.load("/tmp/_be_numba.npy")
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))
