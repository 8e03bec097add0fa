"""Small scalar/vector numerical helpers shared by the modules."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# 8-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


def solve_increasing(F, target, max_expand=2100, max_iter=400):
    """Solve ``F(t) = target`` for ``t >= 0`` with ``F`` increasing and ``F(0) <= target``.

    Vectorized over ``target``. The bracket starts at [0, 1]; the upper end is
    doubled until it straddles the root, then the lower end is raised to the
    largest power-of-two fraction still below it, and the bracket is bisected
    until it collapses to adjacent floats.
    """
    target = np.asarray(target, dtype=float)
    if np.any(target < 0) or not np.all(np.isfinite(target)):
        raise ValueError("target must be finite and >= 0")
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(max_expand):
        short = F(hi) < target
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise ConvergenceError("bracket expansion did not straddle the root", (lo, hi))
    # tighten from below too, so tiny targets do not cost a thousand halvings
    lo = 0.5 * hi
    for _ in range(max_expand):
        over = (lo > 0.0) & (F(lo) >= target) & (target > 0.0)
        if not over.any():
            break
        hi = np.where(over, lo, hi)
        lo = np.where(over, 0.5 * lo, lo)
    lo = np.where(F(lo) < target, lo, 0.0)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi) | (hi - lo <= 4.0 * np.finfo(float).eps * hi)
        done |= target == 0.0
        if done.all():
            break
        below = F(mid) < target
        lo = np.where(below & ~done, mid, lo)
        hi = np.where(~below & ~done, mid, hi)
    else:
        raise ConvergenceError("bisection did not converge", (lo, hi))
    # pick the endpoint with the smaller residual
    res_lo = np.abs(F(lo) - target)
    res_hi = np.abs(F(hi) - target)
    root = np.where(res_lo <= res_hi, lo, hi)
    return np.where(target == 0.0, 0.0, root)


def golden_section(f, a, b, tol=1e-10, max_iter=200):
    """Minimize a unimodal scalar function on [a, b]; returns (x, f(x))."""
    if a > b:
        a, b = b, a
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def rk4_step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
