"""Finite-difference calculus in the Grushin frame U = d/du, V = r'(u) d/dv.

For a self-map g = (g1, g2) of G_r put g~ = Phi o g = r(g1) + i g2 and

    W = (U - iV)/2,   Wbar = (U + iV)/2,   nu = Wbar g~ / W g~.

If f = Phi o g o Phi^-1 is the conjugate plane map with Beltrami coefficient
mu = f_zbar / f_z, then nu = mu o Phi wherever the derivatives exist. The map g
is conformal off {u = 0} u {g1 = 0} when the frame derivative matrix

    D_r g = [[U g1,          V g1],
             [U g2 / r'(g1), V g2 / r'(g1)]]

is a positive multiple of a rotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import SingularLineError
from .metric import GrushinPoint

NU_THRESHOLD = 1e-8
RP_THRESHOLD = 1e-12
DEFAULT_H = 1e-4
DEFAULT_MARGIN = 0.05


@dataclass
class GrushinMap:
    """A self-map of G_r, either conjugated from a plane map or given by coordinates.

    For ``kind == "conjugated_plane_map"`` only ``plane_map`` (a vectorized
    complex function) is needed and g = Phi^-1 o f o Phi. For
    ``kind == "coordinate_evaluators"`` ``g1`` and ``g2`` take arrays (u, v).
    """

    profile: object
    kind: str
    plane_map: Callable | None = None
    g1: Callable | None = None
    g2: Callable | None = None
    label: str = ""
    params: dict = field(default_factory=dict)

    @classmethod
    def conjugate(cls, profile, f, label="", **params):
        return cls(profile, "conjugated_plane_map", plane_map=f, label=label, params=params)

    @classmethod
    def from_coordinates(cls, profile, g1, g2, label=""):
        return cls(profile, "coordinate_evaluators", g1=g1, g2=g2, label=label)

    def tilde(self, u, v):
        """g~ = Phi o g as a complex array."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "conjugated_plane_map":
            return np.asarray(self.plane_map(self.profile.r(u) + 1j * v), dtype=complex)
        return self.profile.r(self.g1(u, v)) + 1j * np.asarray(self.g2(u, v), dtype=float)

    def evaluate(self, u, v):
        """(g1, g2) as arrays."""
        if self.kind == "conjugated_plane_map":
            t = self.tilde(u, v)
            return np.asarray(self.profile.r_inverse(t.real), dtype=float), t.imag
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (np.asarray(self.g1(u, v), dtype=float) * np.ones_like(u),
                np.asarray(self.g2(u, v), dtype=float) * np.ones_like(v))

    def __call__(self, w):
        g1, g2 = self.evaluate(w[0], w[1])
        return GrushinPoint(float(g1), float(g2))

    def plane(self, z):
        """The conjugate f = Phi o g o Phi^-1."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "conjugated_plane_map":
            return np.asarray(self.plane_map(z), dtype=complex)
        return self.tilde(self.profile.r_inverse(z.real), z.imag)


@dataclass
class DerivativeSample:
    at: GrushinPoint
    Ug1: float
    Vg1: float
    Ug2: float
    Vg2: float
    Urg1: float
    Vrg1: float
    W_tilde_g: complex
    Wbar_tilde_g: complex
    nu: complex | None
    Drg: np.ndarray
    drg_defined: bool
    fd_step: float


def _frame_arrays(m, u, v, h):
    """Central frame differences at arrays of points.

    The v-step is h r'(u), so the quotient by 2h approximates V = r'(u) d/dv
    directly without dividing by r'(u).
    """
    p = m.profile
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    hv = h * p.r_prime(u)
    uu = np.stack([u + h, u - h, u, u])
    vv = np.stack([v, v, v + hv, v - hv])
    t = m.tilde(uu, vv)
    g1, _ = m.evaluate(uu, vv)
    A, B = t.real, t.imag
    d = {}
    for name, arr in (("g1", g1), ("rg1", A), ("g2", B)):
        d["U" + name] = (arr[0] - arr[1]) / (2.0 * h)
        d["V" + name] = (arr[2] - arr[3]) / (2.0 * h)
    UA, VA, UB, VB = d["Urg1"], d["Vrg1"], d["Ug2"], d["Vg2"]
    d["W"] = 0.5 * ((UA + VB) + 1j * (UB - VA))
    d["Wbar"] = 0.5 * ((UA - VB) + 1j * (UB + VA))
    g1c, _ = m.evaluate(u, v)
    d["g1"] = g1c
    rp_g1 = p.r_prime(g1c)
    d["drg_defined"] = rp_g1 > RP_THRESHOLD
    with np.errstate(divide="ignore", invalid="ignore"):
        row2 = np.where(d["drg_defined"], 1.0 / rp_g1, np.nan)
    d["D"] = np.stack([
        np.stack([d["Ug1"], d["Vg1"]], axis=-1),
        np.stack([d["Ug2"] * row2, d["Vg2"] * row2], axis=-1),
    ], axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = d["Wbar"] / d["W"]
    d["nu_defined"] = np.abs(d["W"]) > NU_THRESHOLD
    d["nu"] = np.where(d["nu_defined"], nu, np.nan)
    return d


def frame_derivative(m, at, h=DEFAULT_H):
    """Frame derivatives, W g~, Wbar g~, nu and D_r g at one point."""
    u, v = float(at[0]), float(at[1])
    if abs(u) <= h:
        raise SingularLineError(f"|u|={abs(u)} is within one step h={h} of the singular line")
    d = _frame_arrays(m, np.array([u]), np.array([v]), h)
    nu = complex(d["nu"][0]) if d["nu_defined"][0] else None
    return DerivativeSample(
        at=GrushinPoint(u, v),
        Ug1=float(d["Ug1"][0]), Vg1=float(d["Vg1"][0]),
        Ug2=float(d["Ug2"][0]), Vg2=float(d["Vg2"][0]),
        Urg1=float(d["Urg1"][0]), Vrg1=float(d["Vrg1"][0]),
        W_tilde_g=complex(d["W"][0]), Wbar_tilde_g=complex(d["Wbar"][0]),
        nu=nu, Drg=d["D"][0], drg_defined=bool(d["drg_defined"][0]), fd_step=h,
    )


def grushin_beltrami_nu(m, at, h=DEFAULT_H):
    """nu = Wbar g~ / W g~ at ``at``; None where |W g~| <= 1e-8."""
    return frame_derivative(m, at, h).nu


def _wirtinger(f, z, h):
    z = np.asarray(z, dtype=complex)
    fx = (f(z + h) - f(z - h)) / (2.0 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2.0 * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy), fx, fy


def classical_beltrami_mu(f, z, h=DEFAULT_H):
    """mu = f_zbar / f_z by central differences; None where |f_z| <= 1e-8."""
    if not np.iscomplexobj(z) and np.ndim(z) == 1:
        z = complex(z[0], z[1])
    fz, fzbar, _, _ = _wirtinger(f, z, h)
    fz, fzbar = complex(fz), complex(fzbar)
    if abs(fz) <= NU_THRESHOLD:
        return None
    return fzbar / fz


class Region(NamedTuple):
    """Axis-aligned box of grid points in G_r (endpoints included)."""

    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float
    n_u: int = 25
    n_v: int = 25

    def grid(self):
        u = np.linspace(self.u_lo, self.u_hi, self.n_u)
        v = np.linspace(self.v_lo, self.v_hi, self.n_v)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return uu.ravel(), vv.ravel()


@dataclass
class ConsistencyReport:
    max_deviation: float
    worst_point: tuple | None
    n_points: int
    n_evaluated: int
    n_skipped: int
    n_undefined: int
    tol: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def conjugation_consistency(m, grid, h=DEFAULT_H, tol=1e-4, u_min=DEFAULT_MARGIN):
    """max |nu(w) - mu(Phi(w))| over a grid, nu from the Grushin frame and mu
    from plane differences of the conjugate map.

    Points with |u| < u_min or |g1| < u_min are skipped and counted.
    """
    u, v = grid.grid() if isinstance(grid, Region) else map(np.asarray, grid)
    g1, _ = m.evaluate(u, v)
    keep = (np.abs(u) >= u_min) & (np.abs(g1) >= u_min)
    uk, vk = u[keep], v[keep]
    d = _frame_arrays(m, uk, vk, h)
    fz, fzbar, _, _ = _wirtinger(m.plane, m.profile.r(uk) + 1j * vk, h)
    mu_defined = np.abs(fz) > NU_THRESHOLD
    both = d["nu_defined"] & mu_defined
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = fzbar / fz
    dev = np.where(both, np.abs(d["nu"] - mu), -np.inf)
    if dev.size and np.isfinite(dev.max()):
        i = int(np.argmax(dev))
        worst, at = float(dev[i]), (float(uk[i]), float(vk[i]))
    else:
        worst, at = 0.0, None
    return ConsistencyReport(
        max_deviation=worst,
        worst_point=at,
        n_points=int(u.size),
        n_evaluated=int(both.sum()),
        n_skipped=int((~keep).sum()),
        n_undefined=int((~both).sum()),
        tol=tol,
        passed=bool(worst <= tol),
    )


@dataclass
class ConformalityCertificate:
    passed: bool
    max_diag_deviation: float
    max_offdiag_deviation: float
    min_det: float
    worst_point: tuple | None
    n_points: int
    n_singular: int
    nu_max_abs: float
    nu_mean_abs: float
    n_nu_undefined: int
    tol: float
    h: float

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, default=float)


def conformality_test(m, region, h=DEFAULT_H, tol=1e-5):
    """Check that D_r g is a conformal matrix at every grid point of ``region``.

    Per point: |D00 - D11| <= tol, |D01 + D10| <= tol and det > tol. Points on
    the singular line, within one step of it, or where r'(g1) vanishes count
    as failures: the matrix is not defined there.
    """
    u, v = region.grid() if isinstance(region, Region) else map(np.asarray, region)
    off_line = np.abs(u) > h
    d = _frame_arrays(m, u[off_line], v[off_line], h)
    ok_rows = d["drg_defined"]
    D = d["D"][ok_rows]
    diag = np.abs(D[:, 0, 0] - D[:, 1, 1])
    off = np.abs(D[:, 0, 1] + D[:, 1, 0])
    det = D[:, 0, 0] * D[:, 1, 1] - D[:, 0, 1] * D[:, 1, 0]
    bad_nan = ~(np.isfinite(diag) & np.isfinite(off) & np.isfinite(det))
    n_singular = int((~off_line).sum() + (~ok_rows).sum() + bad_nan.sum())

    score = np.where(bad_nan, np.inf, np.maximum(np.maximum(diag, off) / tol, tol / np.where(det > 0, det, 1e-300)))
    uu, vv = u[off_line][ok_rows], v[off_line][ok_rows]
    worst = None
    if score.size:
        i = int(np.argmax(score))
        worst = (float(uu[i]), float(vv[i]))
    if n_singular and worst is None:
        j = int(np.argmin(np.abs(u)))
        worst = (float(u[j]), float(v[j]))

    def _max(a):
        a = a[np.isfinite(a)]
        return float(a.max()) if a.size else 0.0

    nu = d["nu"][d["nu_defined"]]
    nu_abs = np.abs(nu)
    max_diag, max_off = _max(diag), _max(off)
    min_det = float(det[np.isfinite(det)].min()) if np.isfinite(det).any() else float("nan")
    passed = (n_singular == 0 and max_diag <= tol and max_off <= tol and min_det > tol)
    return ConformalityCertificate(
        passed=bool(passed),
        max_diag_deviation=max_diag,
        max_offdiag_deviation=max_off,
        min_det=min_det,
        worst_point=worst,
        n_points=int(u.size),
        n_singular=n_singular,
        nu_max_abs=float(nu_abs.max()) if nu_abs.size else 0.0,
        nu_mean_abs=float(nu_abs.mean()) if nu_abs.size else 0.0,
        n_nu_undefined=int((~d["nu_defined"]).sum()),
        tol=tol,
        h=h,
    )


def jacobian_signs(m, points, h=DEFAULT_H):
    """Signs of det D_r g at ``points`` and of the plane Jacobian of f at Phi(points)."""
    u, v = map(np.asarray, points)
    d = _frame_arrays(m, u, v, h)
    D = d["D"]
    det_r = D[:, 0, 0] * D[:, 1, 1] - D[:, 0, 1] * D[:, 1, 0]
    _, _, fx, fy = _wirtinger(m.plane, m.profile.r(u) + 1j * v, h)
    det_f = fx.real * fy.imag - fy.real * fx.imag
    return np.sign(det_r), np.sign(det_f)


APPROACH_DIRECTIONS = tuple(
    (float(np.cos(a)), float(np.sin(a))) for a in np.arange(8) * np.pi / 4
)


def limit_probe(m, w0, radii=(1e-1, 1e-2, 1e-3), h=None):
    """D_r g along the 8 axis/diagonal approach paths into ``w0``.

    Directions that stay on the singular line are skipped. Returns a dict
    with the matrices at each radius per direction, the spread between
    directions at the smallest radius, and whether every limit candidate is
    finite and non-zero. This is evidence about the limit, not a proof.
    """
    u0, v0 = w0
    out = {}
    for du, dv in APPROACH_DIRECTIONS:
        if u0 == 0.0 and abs(du) < 1e-12:
            continue
        mats = []
        for rho in radii:
            u, v = u0 + rho * du, v0 + rho * dv
            step = h if h is not None else 0.1 * rho * max(abs(du), 1e-3)
            step = min(step, 0.5 * abs(u)) if u != 0 else step
            mats.append(_frame_arrays(m, np.array([u]), np.array([v]), step)["D"][0])
        out[(du, dv)] = np.array(mats)
    last = np.array([mats[-1] for mats in out.values()])
    finite = bool(np.all(np.isfinite(last)))
    nonzero = bool(finite and np.all(np.linalg.norm(last, axis=(1, 2)) > 1e-8))
    spread = float(np.max(np.abs(last - last.mean(axis=0)))) if finite else float("inf")
    return {"matrices": out, "spread": spread, "defined": finite, "nonzero": nonzero}
