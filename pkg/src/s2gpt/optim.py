"""Optimizers used by the pipeline.

Plain gradient descent drives the online coefficient solves, Adam is the
robust fallback, and L-BFGS (two-loop recursion, strong Wolfe line search)
trains the full networks. All three are deterministic state machines: same
oracle, start point and config give the same history.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class OptimConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    history: int = 20            # L-BFGS memory
    grad_tol: float = 0.0        # max-norm stop threshold (0 disables)
    loss_tol: float = 0.0        # relative loss-change stop threshold
    c1: float = 1e-4             # Wolfe sufficient decrease
    c2: float = 0.9              # Wolfe curvature
    max_ls: int = 25             # line-search oracle budget per epoch

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.history < 1:
            raise ValueError("history must be at least 1")


@dataclass
class OptimResult:
    x: np.ndarray
    loss_history: list
    converged: bool
    flag: Optional[str] = None   # 'nan', 'line_search', None
    n_oracle_calls: int = 0

    @property
    def loss(self) -> float:
        return self.loss_history[-1]


Oracle = Callable[[np.ndarray], tuple]


def _grad_norm(g: np.ndarray) -> float:
    return float(np.max(np.abs(g))) if g.size else 0.0


def gd_run(oracle: Oracle, x0: np.ndarray, config: OptimConfig) -> OptimResult:
    """Fixed-step gradient descent: x ← x − δ·∇f."""
    x = np.array(x0, dtype=float)
    f, g = oracle(x)
    hist = [f]
    calls = 1
    if not np.isfinite(f):
        return OptimResult(x, hist, False, "nan", calls)
    for _ in range(config.epochs):
        if config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol:
            return OptimResult(x, hist, True, None, calls)
        x = x - config.learning_rate * g
        f, g = oracle(x)
        calls += 1
        if not np.isfinite(f):
            return OptimResult(x, hist, False, "nan", calls)
        hist.append(f)
    converged = config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol
    return OptimResult(x, hist, converged, None, calls)


def adam_run(oracle: Oracle, x0: np.ndarray, config: OptimConfig,
             beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> OptimResult:
    """Adam with bias-corrected moments; same termination rules as gd_run."""
    x = np.array(x0, dtype=float)
    f, g = oracle(x)
    hist = [f]
    calls = 1
    if not np.isfinite(f):
        return OptimResult(x, hist, False, "nan", calls)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    for k in range(1, config.epochs + 1):
        if config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol:
            return OptimResult(x, hist, True, None, calls)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        mhat = m / (1.0 - beta1 ** k)
        vhat = v / (1.0 - beta2 ** k)
        x = x - config.learning_rate * mhat / (np.sqrt(vhat) + eps)
        f, g = oracle(x)
        calls += 1
        if not np.isfinite(f):
            return OptimResult(x, hist, False, "nan", calls)
        hist.append(f)
    converged = config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol
    return OptimResult(x, hist, converged, None, calls)


def _two_loop(g, s_list, y_list, rho_list):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def _strong_wolfe(oracle, x, f0, g0, d, t0, config):
    """Bracket-and-zoom strong Wolfe search along d from x.

    Returns (t, f, g, calls) or (None, ..., calls) on failure.
    """
    c1, c2 = config.c1, config.c2
    dg0 = float(g0 @ d)
    if dg0 >= 0:
        return None, f0, g0, 0

    def phi(t):
        f, g = oracle(x + t * d)
        return f, g, float(g @ d)

    calls = 0
    t_prev, f_prev, dg_prev = 0.0, f0, dg0
    g_prev = g0
    t = t0
    t_hi = None
    f_hi = dg_hi = None
    bracketed = False
    for _ in range(config.max_ls):
        f, g, dg = phi(t)
        calls += 1
        if not np.isfinite(f):
            t_lo, f_lo, g_lo, dg_lo = t_prev, f_prev, g_prev, dg_prev
            t_hi, f_hi = t, f
            bracketed = True
            break
        if f > f0 + c1 * t * dg0 or (calls > 1 and f >= f_prev):
            t_lo, f_lo, g_lo, dg_lo = t_prev, f_prev, g_prev, dg_prev
            t_hi, f_hi, dg_hi = t, f, dg
            bracketed = True
            break
        if abs(dg) <= -c2 * dg0:
            return t, f, g, calls
        if dg >= 0:
            t_lo, f_lo, g_lo, dg_lo = t, f, g, dg
            t_hi, f_hi, dg_hi = t_prev, f_prev, dg_prev
            bracketed = True
            break
        t_prev, f_prev, g_prev, dg_prev = t, f, g, dg
        t *= 2.0
    if not bracketed:
        return None, f0, g0, calls

    # zoom: shrink [t_lo, t_hi] keeping the sufficient-decrease invariant on t_lo
    for _ in range(config.max_ls - calls):
        t = 0.5 * (t_lo + t_hi)
        if abs(t_hi - t_lo) < 1e-16 * max(1.0, abs(t_lo)):
            break
        f, g, dg = phi(t)
        calls += 1
        if not np.isfinite(f) or f > f0 + c1 * t * dg0 or f >= f_lo:
            t_hi, f_hi = t, f
        else:
            if abs(dg) <= -c2 * dg0:
                return t, f, g, calls
            if dg * (t_hi - t_lo) >= 0:
                t_hi, f_hi = t_lo, f_lo
            t_lo, f_lo, g_lo, dg_lo = t, f, g, dg
    if t_lo > 0.0 and f_lo < f0:
        # acceptable decrease even though curvature was never certified
        return t_lo, f_lo, g_lo, calls
    return None, f0, g0, calls


def lbfgs_run(oracle: Oracle, x0: np.ndarray, config: OptimConfig) -> OptimResult:
    """L-BFGS with two-loop recursion and strong Wolfe line search.

    One epoch is one outer iteration (direction + line search); oracle-call
    counts per epoch vary with the search. The line search's trial step is
    the configured learning rate until curvature pairs exist, then the unit
    quasi-Newton step.
    """
    x = np.array(x0, dtype=float)
    f, g = oracle(x)
    hist = [f]
    calls = 1
    if not np.isfinite(f):
        return OptimResult(x, hist, False, "nan", calls)
    best_x, best_f = x.copy(), f
    s_list, y_list, rho_list = [], [], []
    for _ in range(config.epochs):
        if config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol:
            return OptimResult(x, hist, True, None, calls)
        d = -_two_loop(g, s_list, y_list, rho_list)
        if float(d @ g) >= 0:
            d = -g
            s_list, y_list, rho_list = [], [], []
        t0 = 1.0 if s_list else config.learning_rate
        t, f_new, g_new, ls_calls = _strong_wolfe(oracle, x, f, g, d, t0, config)
        calls += ls_calls
        if t is None:
            return OptimResult(best_x, hist, False, "line_search", calls)
        s = t * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > config.history:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        x = x + s
        prev_f = f
        f, g = f_new, g_new
        hist.append(f)
        if f < best_f:
            best_x, best_f = x.copy(), f
        if not np.isfinite(f):
            return OptimResult(best_x, hist, False, "nan", calls)
        if config.loss_tol > 0 and abs(prev_f - f) <= config.loss_tol * max(1.0, abs(f)):
            return OptimResult(x, hist, True, None, calls)
    converged = config.grad_tol > 0 and _grad_norm(g) <= config.grad_tol
    return OptimResult(x, hist, converged, None, calls)


OPTIMIZERS = {"gd": gd_run, "adam": adam_run, "lbfgs": lbfgs_run}


def run_optimizer(name: str, oracle: Oracle, x0: np.ndarray, config: OptimConfig) -> OptimResult:
    try:
        fn = OPTIMIZERS[name]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}; choices {sorted(OPTIMIZERS)}") from None
    return fn(oracle, x0, config)
