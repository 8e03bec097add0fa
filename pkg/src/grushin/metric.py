"""Distances on G_r: the explicit quasidistance and Carnot-Caratheodory estimates.

The quasidistance between w = (u, v) and w' = (u', v') is

    d(w, w') = max{|u - u'|, min{M, |v - v'| / max{r'(u), r'(u')}}},

with M the root of M r'(M) = |v - v'| (and d = M when u = u' = 0). It is
comparable to the sub-Riemannian distance d_CC, which we bound from above by
explicit horizontal paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._numerics import GL_NODES, GL_WEIGHTS, golden_section, solve_increasing

# crossing nodes on the singular line are pushed this far off it
AXIS_OFFSET = 1e-12
MAX_COVER = 10**8

BRANCHES = ("horizontal_dominates", "ratio_dominates", "M_dominates", "both_on_axis")


class GrushinPoint(NamedTuple):
    u: float
    v: float


@dataclass
class QuasidistanceResult:
    value: float
    M: float
    branch: str

    def to_dict(self):
        return {"quasidistance": self.value, "M": self.M, "branch": self.branch}


@dataclass
class HorizontalPath:
    nodes: np.ndarray
    length_r: float
    history: tuple = field(default=())

    def points(self):
        return [GrushinPoint(float(a), float(b)) for a, b in self.nodes]


def solve_M(p, dv):
    """Root M >= 0 of M r'(M) = dv. Accepts scalars or arrays."""
    dv_arr = np.asarray(dv, dtype=float)
    if np.any(dv_arr < 0):
        raise ValueError("dv must be >= 0")
    M = solve_increasing(lambda t: t * p.r_prime(t), dv_arr)
    return M if M.ndim else float(M)


def quasidistance_array(p, u1, v1, u2, v2):
    """Vectorized quasidistance; returns (value, M, branch_index)."""
    u1, v1, u2, v2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u1, v1, u2, v2)))
    du = np.abs(u1 - u2)
    dv = np.abs(v1 - v2)
    M = np.asarray(solve_M(p, dv), dtype=float)
    denom = np.maximum(p.r_prime(u1), p.r_prime(u2))
    on_axis = (u1 == 0.0) & (u2 == 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(dv == 0.0, 0.0, dv / denom)
    inner = np.minimum(M, ratio)
    value = np.where(on_axis, M, np.maximum(du, inner))
    branch = np.where(du >= inner, 0, np.where(ratio < M, 1, 2))
    branch = np.where(on_axis & (dv > 0), 3, branch)
    return value, M, branch


def quasidistance(p, w, w2):
    (u1, v1), (u2, v2) = w, w2
    value, M, branch = quasidistance_array(p, u1, v1, u2, v2)
    return QuasidistanceResult(float(value), float(M), BRANCHES[int(branch)])


def _graded_integral(p, k, a, b):
    """Integral of sqrt(1 + k^2 / r'(t)^2) over [a, b] with 0 < a <= b.

    Panels halve in width toward ``a`` so the near-axis growth of the
    integrand is resolved; each panel uses the 8-point Gauss-Legendre rule.
    """
    if b <= a:
        return 0.0
    edges = [b]
    while edges[-1] * 0.5 > a:
        edges.append(edges[-1] * 0.5)
    edges.append(a)
    edges = np.asarray(edges)
    hi, lo = edges[:-1], edges[1:]
    width = hi - lo
    t = lo[:, None] + width[:, None] * GL_NODES[None, :]
    with np.errstate(over="ignore", divide="ignore"):
        g = np.sqrt(1.0 + (k / p.r_prime(t)) ** 2)
    return float(np.sum(width[:, None] * GL_WEIGHTS[None, :] * g))


def segment_length(p, u0, v0, u1, v1):
    """l_r length of the straight segment (u0, v0) -> (u1, v1)."""
    du = u1 - u0
    dv = abs(v1 - v0)
    if dv == 0.0:
        return abs(du)
    if du == 0.0:
        if u0 == 0.0:
            return math.inf
        return dv / float(p.r_prime(u0))
    # in the u-parametrization the integrand is sqrt(1 + k^2/r'(u)^2), r' even
    k = dv / abs(du)
    a0, a1 = abs(u0), abs(u1)
    if u0 * u1 < 0.0:
        return _graded_integral(p, k, AXIS_OFFSET, a0) + _graded_integral(p, k, AXIS_OFFSET, a1)
    lo, hi = min(a0, a1), max(a0, a1)
    return _graded_integral(p, k, max(lo, AXIS_OFFSET), hi)


def path_length(p, path):
    """l_r length of a piecewise-linear path (HorizontalPath or (n, 2) nodes)."""
    nodes = path.nodes if isinstance(path, HorizontalPath) else np.asarray(path, dtype=float)
    if len(nodes) < 2:
        raise ValueError("a path needs at least 2 nodes")
    total = 0.0
    for (u0, v0), (u1, v1) in zip(nodes[:-1], nodes[1:]):
        total += segment_length(p, float(u0), float(v0), float(u1), float(v1))
    return total


def make_path(p, nodes):
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    return HorizontalPath(nodes, path_length(p, nodes))


def _lshape_cost(p, u, u2, dv, t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.abs(u - t) + dv / p.r_prime(t) + np.abs(t - u2)


def _canonical(w, w2):
    """Reduce a pair to a normal form; returns the two reduced points and the undo map.

    The first reduced point is (a, 0) and the second (b, |dv|) with a + b >= 0
    and a <= b, reached by a vertical translation and the reflections
    u -> -u, v -> -v and swapping the endpoints. The path searches are
    deterministic functions of the reduced pair, so their values are exactly
    symmetric and invariant under those isometries (translations whenever dv
    is unchanged in floating point).
    """
    (u, v), (u2, v2) = w, w2
    u, v, u2, v2 = float(u), float(v), float(u2), float(v2)
    flip = -1.0 if (u + u2 < 0.0 or (u + u2 == 0.0 and u < 0.0)) else 1.0
    swap = flip * u > flip * u2
    (a, va), (b, vb) = ((u2, v2), (u, v)) if swap else ((u, v), (u2, v2))
    vsign = -1.0 if vb < va else 1.0

    def undo(nodes):
        nodes = np.array(nodes, dtype=float)
        nodes[:, 0] *= flip
        nodes[:, 1] = vsign * nodes[:, 1] + va
        if swap:
            nodes = nodes[::-1].copy()
        nodes[0] = (u, v)
        nodes[-1] = (u2, v2)
        return nodes

    return (flip * a, 0.0), (flip * b, abs(vb - va)), undo


def cc_upper_lshape(p, w, w2):
    """Best detour w -> (t, v) -> (t, v') -> w' over the pivot abscissa t.

    Returns ``(value, HorizontalPath)``; the value bounds d_CC from above.
    """
    a, b, undo = _canonical(w, w2)
    value, nodes = _lshape(p, a, b)
    return value, HorizontalPath(undo(nodes), value)


def _lshape(p, w, w2):
    (u, v), (u2, v2) = w, w2
    dv = abs(v2 - v)
    if dv == 0.0:
        nodes = [(u, v), (u, v), (u, v2), (u2, v2)]
        return abs(u - u2), np.array(nodes)

    M = solve_M(p, dv)
    span = max(abs(u), abs(u2)) + M
    scan = np.geomspace(M * 1e-3, 64.0 * span, 400)
    extra = np.array([abs(u), abs(u2), M, span])
    pos = np.unique(np.concatenate([scan, extra[extra > 0]]))

    best_t, best = None, math.inf
    for sign in (1.0, -1.0):
        t = sign * pos
        cost = _lshape_cost(p, u, u2, dv, t)
        i = int(np.argmin(cost))
        lo = pos[max(i - 1, 0)]
        hi = pos[min(i + 1, len(pos) - 1)]
        x, fx = golden_section(lambda s: float(_lshape_cost(p, u, u2, dv, sign * s)), lo, hi,
                               tol=1e-13)
        if fx > cost[i]:
            x, fx = pos[i], float(cost[i])
        if fx < best:
            best_t, best = sign * x, fx

    nodes = np.array([(u, v), (best_t, v), (best_t, v2), (u2, v2)])
    return path_length(p, nodes), nodes


def _refine_nodes(p, nodes, n_nodes):
    """Split the longest segments at their midpoints until ``n_nodes`` nodes exist."""
    keep = [nodes[0]]
    for nd in nodes[1:]:
        if not np.array_equal(nd, keep[-1]):
            keep.append(nd)
    if len(keep) == 1:
        keep.append(keep[0])
    nodes = [np.asarray(nd, dtype=float) for nd in keep]
    lengths = [segment_length(p, *a, *b) for a, b in zip(nodes[:-1], nodes[1:])]
    while len(nodes) < n_nodes:
        i = int(np.argmax(lengths))
        mid = 0.5 * (nodes[i] + nodes[i + 1])
        nodes.insert(i + 1, mid)
        lengths[i:i + 1] = [segment_length(p, *nodes[i], *mid), segment_length(p, *mid, *nodes[i + 2])]
    return np.array(nodes)


def cc_estimate(p, w, w2, n_nodes=12, n_iters=3):
    """Upper estimate of d_CC(w, w2) by coordinate descent on a horizontal path.

    Starts from the best L-shaped detour and moves one interior node
    coordinate at a time by golden-section line search, accepting only strict
    improvements. The returned path records the length after each sweep in
    ``history``.
    """
    if n_nodes < 3:
        raise ValueError("n_nodes must be >= 3")
    a, b, undo = _canonical(w, w2)
    value, nodes, history = _descend(p, a, b, n_nodes, n_iters)
    return value, HorizontalPath(undo(nodes), value, history)


def _descend(p, w, w2, n_nodes, n_iters):
    upper, lnodes = _lshape(p, w, w2)
    if upper == 0.0:
        return 0.0, lnodes, (0.0,)

    nodes = _refine_nodes(p, lnodes, n_nodes)
    seg = [segment_length(p, *a, *b) for a, b in zip(nodes[:-1], nodes[1:])]
    history = [float(sum(seg))]

    def local(i, coord, x):
        trial = nodes[i].copy()
        trial[coord] = x
        return (segment_length(p, *nodes[i - 1], *trial)
                + segment_length(p, *trial, *nodes[i + 1]))

    for _ in range(n_iters):
        for i in range(1, len(nodes) - 1):
            for coord in (0, 1):
                x0 = nodes[i, coord]
                reach = max(abs(nodes[i - 1, coord] - x0), abs(nodes[i + 1, coord] - x0))
                if reach == 0.0:
                    continue
                current = seg[i - 1] + seg[i]
                x, fx = golden_section(lambda s: local(i, coord, s), x0 - reach, x0 + reach,
                                       tol=1e-12)
                if fx < current:
                    nodes[i, coord] = x
                    seg[i - 1] = segment_length(p, *nodes[i - 1], *nodes[i])
                    seg[i] = segment_length(p, *nodes[i], *nodes[i + 1])
        history.append(float(sum(seg)))

    length = path_length(p, nodes)
    if length > upper:
        # float noise only; the L-shape itself is always available
        return upper, lnodes, tuple(history)
    return length, nodes, tuple(history)


@dataclass
class ComparabilityReport:
    quasidistance: float
    cc_estimate: float
    lshape: float
    m_hat: float
    upper_ratio: float
    lower_ratio: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def comparability_check(p, w, w2, tol=1e-6, n_nodes=12, n_iters=3):
    """Check cc <= 5 d and d <= 2 m cc on one pair.

    The constants 5 and 2m are the ones produced by the detour and
    length-lower-bound arguments for the comparability of d and d_CC.
    """
    p.certify()
    d = quasidistance(p, w, w2).value
    lshape, _ = cc_upper_lshape(p, w, w2)
    cc, _ = cc_estimate(p, w, w2, n_nodes, n_iters)
    m = p.m_hat
    upper_ok = cc <= 5.0 * d * (1.0 + tol)
    lower_ok = d <= 2.0 * m * cc * (1.0 + tol)
    return ComparabilityReport(
        quasidistance=d,
        cc_estimate=cc,
        lshape=lshape,
        m_hat=m,
        upper_ratio=cc / d if d > 0 else 0.0,
        lower_ratio=d / (2.0 * m * cc) if cc > 0 else 0.0,
        passed=bool(upper_ok and lower_ok),
    )


def covering_number(p, square, eps):
    """Number of quasidistance eps-balls in a deterministic cover of a square.

    ``square`` is ``((u0, v0), side)``. Rows of centers sit at horizontal pitch
    eps; row j uses vertical pitch eps * max{r'(u_j), r'(eps)}, the smaller of
    the two vertical reaches of an eps-ball (the second is the on-axis reach,
    where M(dv) <= eps exactly when dv <= eps r'(eps)).
    """
    (u0, v0), side = square
    if not 0 < eps <= side:
        raise ValueError("need 0 < eps <= side")
    n_rows = math.ceil(side / eps - 1e-12)
    if n_rows > MAX_COVER:
        raise ValueError(f"eps={eps} needs more than {MAX_COVER} balls")
    centers = u0 + (np.arange(n_rows) + 0.5) * eps
    pitch = eps * np.maximum(p.r_prime(centers), p.r_prime(eps))
    with np.errstate(divide="ignore"):
        per_row = np.ceil(side / pitch - 1e-12)
    total = float(np.sum(per_row))
    if not math.isfinite(total) or total > MAX_COVER:
        raise ValueError(f"eps={eps} needs more than {MAX_COVER} balls")
    return int(total)


def covering_rows(p, square, eps_values):
    """Rows (eps, count, count*eps^2/ln(1/eps)) for a sweep of radii."""
    rows = []
    for eps in eps_values:
        n = covering_number(p, square, eps)
        ratio = n * eps**2 / math.log(1.0 / eps) if eps < 1 else math.nan
        rows.append((float(eps), n, ratio))
    return rows
