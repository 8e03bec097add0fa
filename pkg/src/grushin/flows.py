"""Payne-type conformal flows on G_r.

The flow fields (xi_k, eta_k) are

    (xi_1, eta_1) = (0, 1),
    (xi_2, eta_2) = (r(x)/r'(x), y),
    (xi_k, eta_k) = (2 xi eta, eta^2 - (r'(x) xi)^2)   from k - 1, for k >= 3,

and b_k = r'(x) xi_k + i eta_k equals i(-i Phi)^alpha with alpha = 2^(k-2) for
k >= 3. Since d/ds (Phi o g_k) = b_k o g_k, the time-s maps have the closed form

    Phi o g_k = z / ((1 - alpha)(-iz)^(alpha-1) s + 1)^(1/(alpha-1)),   z = Phi(u, v),

taken on the principal branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import rk4_step
from .calculus import DEFAULT_H, DEFAULT_MARGIN, GrushinMap, Region, conformality_test
from .errors import BlowUpError, BranchDomainError, DivergenceError
from .metric import GrushinPoint

BRANCH_GUARD = 1e-6
BLOWUP_TOL = 1e-12
STATE_LIMIT = 1e12


@dataclass(frozen=True)
class FlowSpec:
    k: int
    s: float
    profile: object

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"flow index k must be an integer >= 1, got {self.k}")
        if self.s < 0:
            raise ValueError(f"flow time must be >= 0, got {self.s}")

    @property
    def alpha(self):
        return 2 ** (self.k - 2) if self.k >= 3 else None

    @property
    def safe_radius(self):
        """Radius of the disc in the z = Phi(w) plane where the flow map is always defined."""
        if self.k < 3 or self.s == 0:
            return math.inf
        a = self.alpha
        return (1.0 / ((a - 1) * self.s)) ** (1.0 / (a - 1))

    def at_time(self, s):
        return FlowSpec(self.k, s, self.profile)


class FlowField:
    """The flow field of index k: ``xi``, ``eta`` and ``b`` as functions of (x, y)."""

    def __init__(self, spec):
        self.spec = spec

    def __call__(self, x, y):
        p, k = self.spec.profile, self.spec.k
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if k == 1:
            return np.zeros(np.broadcast(x, y).shape), np.ones(np.broadcast(x, y).shape)
        rp = np.asarray(p.r_prime(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            # r/r' -> 0 on the axis since |r(x)/r'(x)| <= |x|
            xi = np.where(x == 0.0, 0.0, np.asarray(p.r(x), dtype=float) / rp)
        eta = y * np.ones_like(xi)
        for _ in range(k - 2):
            xi, eta = 2.0 * xi * eta, eta**2 - (rp * xi) ** 2
        return xi, eta

    def xi(self, x, y):
        return self(x, y)[0]

    def eta(self, x, y):
        return self(x, y)[1]

    def b(self, x, y):
        xi, eta = self(x, y)
        return self.spec.profile.r_prime(np.asarray(x, dtype=float)) * xi + 1j * eta


def xi_eta(spec):
    return FlowField(spec)


def b_closed(spec, x, y):
    """i(-i Phi(x, y))^alpha, the non-recursive form of b_k for k >= 3."""
    if spec.k < 3:
        raise ValueError("the closed form of b_k needs k >= 3")
    z = spec.profile.r(np.asarray(x, dtype=float)) + 1j * np.asarray(y, dtype=float)
    return 1j * (-1j * z) ** spec.alpha


def flow_rhs(spec, w):
    xi, eta = FlowField(spec)(w[0], w[1])
    return float(xi), float(eta)


def _denominator(spec, z):
    a = spec.alpha
    return (1 - a) * (-1j * z) ** (a - 1) * spec.s + 1.0


def _branch_mask(spec, z):
    if spec.k < 3 or spec.s == 0:
        return np.ones(np.shape(z), dtype=bool)
    q = _denominator(spec, np.asarray(z, dtype=complex))
    ok = np.abs(q) > BLOWUP_TOL
    if spec.k >= 4:
        ok &= np.abs(np.angle(q)) < math.pi - BRANCH_GUARD
    return ok


def branch_domain_contains(spec, w):
    """Whether the principal-branch closed form is defined at ``w`` for time ``spec.s``.

    k <= 2: everywhere. k = 3: wherever 1 + izs != 0. k >= 4: wherever
    q = (1 - alpha)(-iz)^(alpha-1) s + 1 stays off the closed negative real
    axis (with an angular guard band), which removes alpha - 1 rays.
    """
    if spec.k < 3:
        return True
    z = spec.profile.r(float(w[0])) + 1j * float(w[1])
    return bool(_branch_mask(spec, np.asarray(z))[()])


def _reachable(spec, w):
    """Branch-safe at time s and, for k = 3, not yet past the blow-up time.

    For k = 3 the denominator 1 + izs moves along a line; once it has crossed
    zero onto the negative real axis the trajectory has gone through infinity.
    """
    if not branch_domain_contains(spec, w):
        return False
    if spec.k == 3:
        z = spec.profile.r(float(w[0])) + 1j * float(w[1])
        q = _denominator(spec, z)
        return not (q.real <= 0 and abs(q.imag) <= BRANCH_GUARD * abs(q))
    return True


def payne_plane_map(k, s):
    """The conjugate plane map f_k^s = Phi o g_k^s o Phi^-1 (profile independent)."""
    k = int(k)
    if k == 1:
        return lambda z: np.asarray(z, dtype=complex) + 1j * s
    if k == 2:
        return lambda z: np.asarray(z, dtype=complex) * math.exp(s)
    a = 2 ** (k - 2)

    def f(z):
        z = np.asarray(z, dtype=complex)
        q = (1 - a) * (-1j * z) ** (a - 1) * s + 1.0
        if a == 2:
            return z / q
        return z * q ** (-1.0 / (a - 1))

    return f


def flow_map(spec, u, v):
    """Vectorized time-s map g_k^s on arrays (u, v); returns (g1, g2)."""
    p = spec.profile
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.s == 0:
        return u.copy(), v.copy()
    if spec.k == 1:
        return u.copy(), v + spec.s
    if spec.k == 2:
        e = math.exp(spec.s)
        return np.asarray(p.r_inverse(p.r(u) * e), dtype=float), v * e
    z = p.r(u) + 1j * v
    q = _denominator(spec, z)
    if np.any(np.abs(q) <= BLOWUP_TOL):
        raise BlowUpError(f"flow k={spec.k} blows up before time s={spec.s}")
    if not np.all(_branch_mask(spec, z)):
        raise BranchDomainError(f"point outside the branch-safe domain of k={spec.k}, s={spec.s}")
    out = payne_plane_map(spec.k, spec.s)(z)
    return np.asarray(p.r_inverse(out.real), dtype=float), out.imag


def closed_form_flow(spec, w):
    """g_k^s(w) from the closed form; the time-0 map is exactly the identity."""
    if spec.s == 0:
        return GrushinPoint(float(w[0]), float(w[1]))
    g1, g2 = flow_map(spec, np.array([float(w[0])]), np.array([float(w[1])]))
    return GrushinPoint(float(g1[0]), float(g2[0]))


def integrate_flow(spec, w, n_steps, trajectory=False):
    """Fixed-step classical RK4 for the flow ODE from ``w`` up to time ``spec.s``.

    Raises :class:`DivergenceError` (with the exit step) if the state stops
    being finite, exceeds 1e12 in size, or, for k >= 3, the initial point
    leaves the branch-safe domain of the elapsed time. With
    ``trajectory=True`` returns an (n_steps + 1, 3) array of rows (s, u, v).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    field = FlowField(spec)

    def rhs(_t, y):
        xi, eta = field(y[0], y[1])
        return np.array([float(xi), float(eta)])

    dt = spec.s / n_steps
    y = np.array([float(w[0]), float(w[1])])
    rows = [(0.0, y[0], y[1])]
    for i in range(n_steps):
        t = (i + 1) * dt
        if spec.k >= 3 and not _reachable(spec.at_time(t), w):
            raise DivergenceError(f"left the branch-safe domain at step {i + 1}", step=i + 1)
        y = rk4_step(rhs, i * dt, y, dt)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > STATE_LIMIT:
            raise DivergenceError(f"trajectory diverged at step {i + 1}", step=i + 1)
        rows.append((t, y[0], y[1]))
    if trajectory:
        return np.array(rows)
    return GrushinPoint(float(y[0]), float(y[1]))


def integrate_flow_adaptive(spec, w, tol=1e-9, max_steps=100_000):
    """RK4 with step doubling: accept a step when the full and two half steps agree to ``tol``."""
    field = FlowField(spec)

    def rhs(_t, y):
        xi, eta = field(y[0], y[1])
        return np.array([float(xi), float(eta)])

    t, y = 0.0, np.array([float(w[0]), float(w[1])])
    dt = spec.s / 16 if spec.s > 0 else 0.0
    steps = 0
    while t < spec.s:
        dt = min(dt, spec.s - t)
        full = rk4_step(rhs, t, y, dt)
        half = rk4_step(rhs, t + 0.5 * dt, rk4_step(rhs, t, y, 0.5 * dt), 0.5 * dt)
        err = float(np.max(np.abs(full - half)))
        if not np.isfinite(err):
            raise DivergenceError(f"trajectory diverged at t={t}", step=steps)
        if err <= tol:
            t += dt
            # local Richardson extrapolation of the two estimates
            y = half + (half - full) / 15.0
            if spec.k >= 3 and not _reachable(spec.at_time(t), w):
                raise DivergenceError(f"left the branch-safe domain at t={t}", step=steps)
            dt *= min(2.0, 0.9 * (tol / max(err, 1e-300)) ** 0.2)
        else:
            dt *= max(0.1, 0.9 * (tol / err) ** 0.2)
        steps += 1
        if steps > max_steps:
            raise DivergenceError("adaptive step budget exhausted", step=steps)
    return GrushinPoint(float(y[0]), float(y[1]))


def flow_as_map(spec):
    """The time-s map as a coordinate-evaluator GrushinMap."""
    return GrushinMap.from_coordinates(
        spec.profile,
        lambda u, v: flow_map(spec, u, v)[0],
        lambda u, v: flow_map(spec, u, v)[1],
        label=f"payne(k={spec.k}, s={spec.s})",
    )


def check_flow_region(spec, region, margin=DEFAULT_MARGIN):
    """Raise :class:`BranchDomainError` unless ``region`` is safe for the flow map.

    The grid must avoid the tube |u| < margin, its image must avoid
    |g1| < margin, and (k >= 3) every grid point and every grid edge must stay
    off the branch cut.
    """
    u, v = region.grid()
    if np.any(np.abs(u) < margin):
        raise BranchDomainError("region meets the singular-line tube |u| < margin")
    if spec.k >= 3 and spec.s > 0:
        z = spec.profile.r(u) + 1j * v
        if not np.all(_branch_mask(spec, z)):
            raise BranchDomainError("region meets the branch cut of the flow map")
        # an edge crosses the cut where Im q changes sign with Re q < 0
        q = _denominator(spec, z).reshape(region.n_u, region.n_v)
        for a, b in ((q[1:, :], q[:-1, :]), (q[:, 1:], q[:, :-1])):
            cross = (np.sign(a.imag) != np.sign(b.imag)) & ((a.real < 0) | (b.real < 0))
            if np.any(cross):
                raise BranchDomainError("region straddles the branch cut of the flow map")
    g1, _ = flow_map(spec, u, v)
    if np.any(np.abs(g1) < margin):
        raise BranchDomainError("the image of the region meets the tube |g1| < margin")


def flow_conformality_check(spec, region, h=DEFAULT_H, tol=1e-5, margin=DEFAULT_MARGIN):
    """Conformality certificate of g_k^s on a branch-safe, off-axis region."""
    if not isinstance(region, Region):
        region = Region(*region)
    check_flow_region(spec, region, margin)
    return conformality_test(flow_as_map(spec), region, h, tol)
