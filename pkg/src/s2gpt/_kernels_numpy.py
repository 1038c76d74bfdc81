"""Pure-numpy kernels (fallback backend).

The semantics here are the contract; `_kernels_numba` mirrors every function
exactly. Keep both files in sync.

Conventions:
  slots      (P, 7) matrix in the order of `slots.SLOT_NAMES`
  params     (3,) padded parameter vector (Helmholtz carries k in slot 2)
  coords     (P, 2) point coordinates, axis 0 = x, axis 1 = t or y
"""

import numpy as np

PDE_KLEIN_GORDON = 0
PDE_ALLEN_CAHN = 1
PDE_BURGERS = 2
PDE_HELMHOLTZ = 3


def helmholtz_q(x, y, a1, a2, k):
    """Analytic source q = Δu + k²u for u = (x²−1)(y²−1)sin(a1πx)sin(a2πy)."""
    pa = a1 * np.pi
    pb = a2 * np.pi
    sx = np.sin(pa * x)
    cx = np.cos(pa * x)
    sy = np.sin(pb * y)
    cy = np.cos(pb * y)
    f = (x * x - 1.0) * sx
    g = (y * y - 1.0) * sy
    fxx = 2.0 * sx + 4.0 * pa * x * cx - pa * pa * (x * x - 1.0) * sx
    gyy = 2.0 * sy + 4.0 * pb * y * cy - pb * pb * (y * y - 1.0) * sy
    return fxx * g + f * gyy + k * k * f * g


def residual_batch(pde_id, slots, params, coords):
    """Strong-form residual at every point, (P,)."""
    x = coords[:, 0]
    z = coords[:, 1]
    u = slots[:, 0]
    if pde_id == PDE_KLEIN_GORDON:
        s = x * np.cos(z)
        return slots[:, 2] + params[0] * slots[:, 4] + params[1] * u + params[2] * u * u + s - s * s
    if pde_id == PDE_ALLEN_CAHN:
        return slots[:, 1] - params[0] * slots[:, 4] + params[1] * (u * u * u - u)
    if pde_id == PDE_BURGERS:
        return slots[:, 1] + u * slots[:, 3] - params[0] * slots[:, 4]
    if pde_id == PDE_HELMHOLTZ:
        q = helmholtz_q(x, z, params[0], params[1], params[2])
        return slots[:, 4] + slots[:, 6] + params[2] * params[2] * u - q
    raise ValueError(f"unknown pde id {pde_id}")


def residual_partials_batch(pde_id, slots, params, coords):
    """Per-slot partial derivatives of the residual, (P, 7)."""
    p = slots.shape[0]
    u = slots[:, 0]
    out = np.zeros((p, 7))
    if pde_id == PDE_KLEIN_GORDON:
        out[:, 0] = params[1] + 2.0 * params[2] * u
        out[:, 2] = 1.0
        out[:, 4] = params[0]
    elif pde_id == PDE_ALLEN_CAHN:
        out[:, 0] = params[1] * (3.0 * u * u - 1.0)
        out[:, 1] = 1.0
        out[:, 4] = -params[0]
    elif pde_id == PDE_BURGERS:
        out[:, 0] = slots[:, 3]
        out[:, 1] = 1.0
        out[:, 3] = u
        out[:, 4] = -params[0]
    elif pde_id == PDE_HELMHOLTZ:
        out[:, 0] = params[2] * params[2]
        out[:, 4] = 1.0
        out[:, 6] = 1.0
    else:
        raise ValueError(f"unknown pde id {pde_id}")
    return out


def tanh_jet_forward(a, out):
    """Push stacked jets through tanh, writing into `out`.

    `a` has shape (5, P, n): pre-activation value, then first/second
    derivative streams for each of the two input axes. Jet rules:
    v = tanh(z), v' = (1−v²)z', v'' = (1−v²)z'' − 2v(1−v²)(z')².
    """
    t = np.tanh(a[0], out=out[0])
    u1 = 1.0 - t * t
    tw = 2.0 * t * u1
    np.multiply(u1, a[1], out=out[1])
    out[2] = u1 * a[2] - tw * a[1] * a[1]
    np.multiply(u1, a[3], out=out[3])
    out[4] = u1 * a[4] - tw * a[3] * a[3]
    return out


def tanh_jet_backward(t, a, g, out):
    """Adjoint of tanh_jet_forward.

    `t` is the forward output, `a` the pre-activation tape, `g` the gradient
    w.r.t. the output; writes the gradient w.r.t. `a` into `out`.
    """
    v = t[0]
    u1 = 1.0 - v * v
    tw = 2.0 * v * u1
    w3 = 2.0 * u1 * (1.0 - 3.0 * v * v)
    out[0] = (
        g[0] * u1
        - tw * (g[1] * a[1] + g[2] * a[2] + g[3] * a[3] + g[4] * a[4])
        - w3 * (g[2] * a[1] * a[1] + g[4] * a[3] * a[3])
    )
    out[1] = g[1] * u1 - 2.0 * tw * g[2] * a[1]
    np.multiply(g[2], u1, out=out[2])
    out[3] = g[3] * u1 - 2.0 * tw * g[4] * a[3]
    np.multiply(g[4], u1, out=out[4])
    return out


def sparse_loss_grad(pde_id, tables, c, srow, params, coords):
    """Sparse-collocation loss and its gradient over the n coefficients.

    tables: (7, n, m) slot values of the orthonormalized basis at the m
    sparse points; srow: transform row sums entering the IC penalty.
    """
    m = coords.shape[0]
    slots = np.einsum("kim,i->mk", tables, c)
    r = residual_batch(pde_id, slots, params, coords)
    dr = residual_partials_batch(pde_id, slots, params, coords)
    w = (2.0 / m) * r
    grad = np.einsum("mk,kim,m->i", dr, tables, w)
    a = float(c @ srow) - 1.0
    loss = float(r @ r) / m + a * a
    grad += (2.0 * a) * srow
    return loss, grad
