"""Numba builds of the hot kernels.

Mirrors `_kernels_numpy` function by function; fastmath stays off so both
backends produce IEEE-compliant, deterministic results.
"""

import math

import numpy as np
from numba import njit

PDE_KLEIN_GORDON = 0
PDE_ALLEN_CAHN = 1
PDE_BURGERS = 2
PDE_HELMHOLTZ = 3


@njit(cache=True, inline="always")
def _q_helmholtz(x, y, a1, a2, k):
    pa = a1 * math.pi
    pb = a2 * math.pi
    sx = math.sin(pa * x)
    cx = math.cos(pa * x)
    sy = math.sin(pb * y)
    cy = math.cos(pb * y)
    f = (x * x - 1.0) * sx
    g = (y * y - 1.0) * sy
    fxx = 2.0 * sx + 4.0 * pa * x * cx - pa * pa * (x * x - 1.0) * sx
    gyy = 2.0 * sy + 4.0 * pb * y * cy - pb * pb * (y * y - 1.0) * sy
    return fxx * g + f * gyy + k * k * f * g


@njit(cache=True)
def helmholtz_q(x, y, a1, a2, k):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _q_helmholtz(x[i], y[i], a1, a2, k)
    return out


@njit(cache=True, inline="always")
def _residual_point(pde_id, u, ut, utt, ux, uxx, uy, uyy, p0, p1, p2, x, z):
    if pde_id == PDE_KLEIN_GORDON:
        s = x * math.cos(z)
        return utt + p0 * uxx + p1 * u + p2 * u * u + s - s * s
    if pde_id == PDE_ALLEN_CAHN:
        return ut - p0 * uxx + p1 * (u * u * u - u)
    if pde_id == PDE_BURGERS:
        return ut + u * ux - p0 * uxx
    return uxx + uyy + p2 * p2 * u - _q_helmholtz(x, z, p0, p1, p2)


@njit(cache=True, nogil=True)
def residual_batch(pde_id, slots, params, coords):
    p = slots.shape[0]
    out = np.empty(p)
    p0 = params[0]
    p1 = params[1]
    p2 = params[2]
    for i in range(p):
        out[i] = _residual_point(
            pde_id, slots[i, 0], slots[i, 1], slots[i, 2], slots[i, 3],
            slots[i, 4], slots[i, 5], slots[i, 6], p0, p1, p2,
            coords[i, 0], coords[i, 1],
        )
    return out


@njit(cache=True, nogil=True)
def residual_partials_batch(pde_id, slots, params, coords):
    p = slots.shape[0]
    out = np.zeros((p, 7))
    p0 = params[0]
    p1 = params[1]
    p2 = params[2]
    if pde_id == PDE_KLEIN_GORDON:
        for i in range(p):
            out[i, 0] = p1 + 2.0 * p2 * slots[i, 0]
            out[i, 2] = 1.0
            out[i, 4] = p0
    elif pde_id == PDE_ALLEN_CAHN:
        for i in range(p):
            u = slots[i, 0]
            out[i, 0] = p1 * (3.0 * u * u - 1.0)
            out[i, 1] = 1.0
            out[i, 4] = -p0
    elif pde_id == PDE_BURGERS:
        for i in range(p):
            out[i, 0] = slots[i, 3]
            out[i, 1] = 1.0
            out[i, 3] = slots[i, 0]
            out[i, 4] = -p0
    else:
        for i in range(p):
            out[i, 0] = p2 * p2
            out[i, 4] = 1.0
            out[i, 6] = 1.0
    return out


@njit(cache=True, nogil=True)
def _jet_forward_fill(a, out):
    # out[0] already holds tanh of the value stream (numpy's vectorized tanh
    # beats per-element libm calls by an order of magnitude)
    t0 = out[0]
    a1, a2, a3, a4 = a[1], a[2], a[3], a[4]
    o1, o2, o3, o4 = out[1], out[2], out[3], out[4]
    p, n = t0.shape
    for i in range(p):
        for j in range(n):
            v = t0[i, j]
            u1 = 1.0 - v * v
            tw = 2.0 * v * u1
            d0 = a1[i, j]
            d1 = a3[i, j]
            o1[i, j] = u1 * d0
            o2[i, j] = u1 * a2[i, j] - tw * d0 * d0
            o3[i, j] = u1 * d1
            o4[i, j] = u1 * a4[i, j] - tw * d1 * d1


def tanh_jet_forward(a, out):
    np.tanh(a[0], out=out[0])
    _jet_forward_fill(a, out)
    return out


@njit(cache=True, nogil=True)
def tanh_jet_backward(t, a, g, out):
    t0 = t[0]
    a1, a2, a3, a4 = a[1], a[2], a[3], a[4]
    g0, g1, g2, g3, g4 = g[0], g[1], g[2], g[3], g[4]
    o0, o1, o2, o3, o4 = out[0], out[1], out[2], out[3], out[4]
    p, n = t0.shape
    for i in range(p):
        for j in range(n):
            v = t0[i, j]
            u1 = 1.0 - v * v
            tw = 2.0 * v * u1
            w3 = 2.0 * u1 * (1.0 - 3.0 * v * v)
            d0 = a1[i, j]
            d1 = a3[i, j]
            o0[i, j] = (
                g0[i, j] * u1
                - tw * (g1[i, j] * d0 + g2[i, j] * a2[i, j]
                        + g3[i, j] * d1 + g4[i, j] * a4[i, j])
                - w3 * (g2[i, j] * d0 * d0 + g4[i, j] * d1 * d1)
            )
            o1[i, j] = g1[i, j] * u1 - 2.0 * tw * g2[i, j] * d0
            o2[i, j] = g2[i, j] * u1
            o3[i, j] = g3[i, j] * u1 - 2.0 * tw * g4[i, j] * d1
            o4[i, j] = g4[i, j] * u1
    return out


@njit(cache=True, nogil=True)
def sparse_loss_grad(pde_id, tables, c, srow, params, coords):
    n = tables.shape[1]
    m = tables.shape[2]
    p0 = params[0]
    p1 = params[1]
    p2 = params[2]
    grad = np.zeros(n)
    acc = 0.0
    slots = np.empty(7)
    for p in range(m):
        for k in range(7):
            v = 0.0
            for i in range(n):
                v += c[i] * tables[k, i, p]
            slots[k] = v
        x = coords[p, 0]
        z = coords[p, 1]
        r = _residual_point(
            pde_id, slots[0], slots[1], slots[2], slots[3], slots[4],
            slots[5], slots[6], p0, p1, p2, x, z,
        )
        acc += r * r
        # per-slot residual partials, then project onto the coefficients
        du = 0.0
        dut = 0.0
        dutt = 0.0
        dux = 0.0
        duxx = 0.0
        duy = 0.0
        duyy = 0.0
        if pde_id == PDE_KLEIN_GORDON:
            du = p1 + 2.0 * p2 * slots[0]
            dutt = 1.0
            duxx = p0
        elif pde_id == PDE_ALLEN_CAHN:
            du = p1 * (3.0 * slots[0] * slots[0] - 1.0)
            dut = 1.0
            duxx = -p0
        elif pde_id == PDE_BURGERS:
            du = slots[3]
            dut = 1.0
            dux = slots[0]
            duxx = -p0
        else:
            du = p2 * p2
            duxx = 1.0
            duyy = 1.0
        w = 2.0 * r / m
        for i in range(n):
            grad[i] += w * (
                du * tables[0, i, p]
                + dut * tables[1, i, p]
                + dutt * tables[2, i, p]
                + dux * tables[3, i, p]
                + duxx * tables[4, i, p]
                + duy * tables[5, i, p]
                + duyy * tables[6, i, p]
            )
    a = -1.0
    for i in range(n):
        a += c[i] * srow[i]
    loss = acc / m + a * a
    for i in range(n):
        grad[i] += 2.0 * a * srow[i]
    return loss, grad
