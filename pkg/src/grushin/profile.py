"""Radial profiles r defining the generalized Grushin planes.

A profile is an odd, increasing homeomorphism r of the line whose derivative
is even, vanishes only at the origin, and satisfies

    r(u)/u <= r'(u) <= beta * r(u)/u        (u != 0).

The vector fields of the plane G_r are d/du and r'(u) d/dv.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numerics import solve_increasing

FAMILIES = ("classical", "power", "log_power", "custom")

DEFAULT_RANGE = (1e-6, 1e6)
DEFAULT_SAMPLES = 600
SAFETY = 1e-6
# relative rise of a sampled supremum over the last tenth of the grid that
# counts as "still growing"
GROWTH_TOL = 1e-3


class InadmissibleProfileWarning(UserWarning):
    pass


@dataclass
class Profile:
    name: str
    family: str
    r: Callable
    r_prime: Callable
    r_inverse: Callable
    params: dict = field(default_factory=dict)
    beta_hat: float | None = None
    m_hat: float | None = None
    beta_diverges: bool = False

    @property
    def beta_certified(self):
        return None if self.beta_hat is None else self.beta_hat * (1.0 + SAFETY)

    @property
    def m_certified(self):
        return None if self.m_hat is None else self.m_hat * (1.0 + SAFETY)

    def certify(self, u_range=DEFAULT_RANGE, n_samples=DEFAULT_SAMPLES):
        """Fill ``beta_hat`` and ``m_hat`` if unset; returns self."""
        if self.beta_hat is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", InadmissibleProfileWarning)
                estimate_beta(self, u_range, n_samples)
        if self.m_hat is None:
            estimate_doubling(self, u_range, n_samples)
        return self

    def to_descriptor(self):
        if self.family == "custom":
            raise ValueError("custom profiles are not serializable")
        return {"family": self.family, "params": dict(self.params)}

    def to_json(self):
        return json.dumps(self.to_descriptor(), sort_keys=True)


def _bisection_inverse(r):
    def r_inverse(x):
        x = np.asarray(x, dtype=float)
        t = solve_increasing(lambda s: r(s), np.abs(x), max_iter=200)
        out = np.sign(x) * t
        return out if out.ndim else float(out)

    return r_inverse


def _scalarize(fn):
    def wrapped(u):
        out = fn(np.asarray(u, dtype=float))
        return out if np.ndim(out) else float(out)

    wrapped.__name__ = getattr(fn, "__name__", "profile_fn")
    return wrapped


def _power_profile(alpha):
    a1 = alpha + 1.0

    def r(u):
        return np.sign(u) * np.abs(u) ** a1 / a1

    def r_prime(u):
        return np.abs(u) ** alpha

    def r_inverse(x):
        return np.sign(x) * (a1 * np.abs(x)) ** (1.0 / a1)

    return r, r_prime, r_inverse


def _log_power_profile(p):
    def r(u):
        a = np.abs(u)
        return np.sign(u) * a**p * np.log1p(a)

    def r_prime(u):
        a = np.abs(u)
        return p * a ** (p - 1.0) * np.log1p(a) + a**p / (1.0 + a)

    return r, r_prime, _bisection_inverse(r)


def make_profile(family, params=None):
    """Build a profile from a family name and its parameters.

    Families: ``classical`` (r = u|u|/2), ``power`` (r' = |u|^alpha, needs
    ``alpha > 0``), ``log_power`` (r = sign(u)|u|^p ln(|u|+1), needs ``p > 1``)
    and ``custom`` (``params`` holds callables ``r`` and ``r_prime``, and
    optionally ``r_inverse`` and ``name``).
    """
    params = dict(params or {})
    if family == "classical":
        r, rp, ri = _power_profile(1.0)
        return Profile("classical", family, _scalarize(r), _scalarize(rp), _scalarize(ri), {})
    if family == "power":
        alpha = float(params.get("alpha", 1.0))
        if not alpha > 0:
            raise ValueError(f"power profile needs alpha > 0, got {alpha}")
        r, rp, ri = _power_profile(alpha)
        return Profile(f"power:{alpha:g}", family, _scalarize(r), _scalarize(rp), _scalarize(ri),
                       {"alpha": alpha})
    if family == "log_power":
        p = float(params.get("p", 2.0))
        if not p > 1:
            raise ValueError(f"log_power profile needs p > 1, got {p}")
        r, rp, ri = _log_power_profile(p)
        return Profile(f"log:{p:g}", family, _scalarize(r), _scalarize(rp), ri, {"p": p})
    if family == "custom":
        try:
            r, rp = params.pop("r"), params.pop("r_prime")
        except KeyError:
            raise ValueError("custom profile needs callables 'r' and 'r_prime'") from None
        r_v = _scalarize(r)
        ri = params.pop("r_inverse", None)
        ri = _scalarize(ri) if ri is not None else _bisection_inverse(r_v)
        name = params.pop("name", "custom")
        return Profile(name, family, r_v, _scalarize(rp), ri, params)
    raise ValueError(f"unknown profile family {family!r}; expected one of {FAMILIES}")


def profile_from_descriptor(desc):
    if isinstance(desc, str):
        desc = json.loads(desc)
    return make_profile(desc["family"], desc.get("params", {}))


def parse_profile(text):
    """Parse ``classical``, ``power:3``, ``log:2`` or ``@file.json``."""
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return profile_from_descriptor(json.load(fh))
    if text.startswith("{"):
        return profile_from_descriptor(text)
    name, _, arg = text.partition(":")
    if name == "classical" and not arg:
        return make_profile("classical")
    if name == "power" and arg:
        return make_profile("power", {"alpha": float(arg)})
    if name in ("log", "log_power") and arg:
        return make_profile("log_power", {"p": float(arg)})
    raise ValueError(f"cannot parse profile {text!r}")


def _grid(u_range, n_samples):
    lo, hi = u_range
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if lo <= 0:
        # the certificates are ratios at u != 0; start just off the origin
        lo = min(1e-6, hi * 1e-6)
    return np.geomspace(lo, hi, n_samples)


def _still_growing(values):
    """True when a sampled sequence is still rising at either end of its grid."""
    if not np.all(np.isfinite(values)):
        return True
    n = len(values)
    k = max(1, n // 10)
    up_hi = values[-1] > values[-1 - k] * (1.0 + GROWTH_TOL)
    up_lo = values[0] > values[k] * (1.0 + GROWTH_TOL)
    return bool(up_hi or up_lo)


def beta_ratio(p, u):
    """u r'(u) / r(u), the quantity bounded by beta."""
    u = np.asarray(u, dtype=float)
    with np.errstate(all="ignore"):
        return u * p.r_prime(u) / p.r(u)


def estimate_beta(p, u_range=DEFAULT_RANGE, n_samples=DEFAULT_SAMPLES):
    """Sampled supremum of u r'(u)/r(u) over a log-spaced grid; stored in ``p.beta_hat``.

    If the ratio is still rising at an end of the grid the profile is flagged
    (``p.beta_diverges``) and an :class:`InadmissibleProfileWarning` is issued:
    no finite beta is supported by the samples.
    """
    u = _grid(u_range, n_samples)
    vals = np.maximum(beta_ratio(p, u), beta_ratio(p, -u))
    finite = vals[np.isfinite(vals)]
    beta = float(finite.max()) if finite.size else float("inf")
    p.beta_hat = beta
    p.beta_diverges = _still_growing(vals)
    if p.beta_diverges:
        warnings.warn(
            f"profile {p.name}: u r'/r still growing at the end of {u_range}; "
            f"sampled sup {beta:.6g} is not a bound",
            InadmissibleProfileWarning,
            stacklevel=2,
        )
    return beta


def estimate_doubling(p, u_range=DEFAULT_RANGE, n_samples=DEFAULT_SAMPLES):
    """Sampled supremum of r'(2u)/r'(u) for u >= 0; stored in ``p.m_hat``."""
    if u_range[0] < 0:
        raise ValueError("doubling is only defined on [0, inf)")
    u = _grid(u_range, n_samples)
    with np.errstate(all="ignore"):
        vals = p.r_prime(2.0 * u) / p.r_prime(u)
    finite = vals[np.isfinite(vals)]
    m = float(finite.max()) if finite.size else float("inf")
    p.m_hat = m
    return m


@dataclass
class Check:
    name: str
    passed: bool
    worst: float
    at: float | None = None
    detail: str = ""


@dataclass
class ProfileReport:
    profile: str
    passed: bool
    checks: dict
    beta_hat: float
    m_hat: float
    warnings: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)

    def failed(self):
        return [c.name for c in self.checks.values() if not c.passed]

    def to_dict(self):
        return {
            "profile": self.profile,
            "passed": self.passed,
            "beta_hat": self.beta_hat,
            "m_hat": self.m_hat,
            "checks": {
                k: {"passed": c.passed, "worst": c.worst, "at": c.at, "detail": c.detail}
                for k, c in self.checks.items()
            },
            "warnings": list(self.warnings),
            "assumptions": list(self.assumptions),
        }


def _worst(excess, u):
    """Largest violation and where; excess <= 0 means the check holds."""
    excess = np.where(np.isfinite(excess), excess, np.inf)
    i = int(np.argmax(excess))
    return float(excess[i]), float(u[i])


def validate_profile(p, u_range=DEFAULT_RANGE, n_samples=DEFAULT_SAMPLES):
    """Run every structural check on ``p`` and return a :class:`ProfileReport`.

    Never raises on a failed check; the report lists worst-case sample
    locations instead.
    """
    u = _grid(u_range, n_samples)
    sym = np.concatenate([-u[::-1], [0.0], u])
    checks = {}
    notes = []

    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", InadmissibleProfileWarning)
        r_sym = np.asarray(p.r(sym), dtype=float)
        rp_pos, rp_neg = np.asarray(p.r_prime(u), dtype=float), np.asarray(p.r_prime(-u), dtype=float)
        r_pos = np.asarray(p.r(u), dtype=float)

        # overflowing samples are reported once here and left out of the shape checks
        fin_sym = np.isfinite(r_sym)
        fin = np.isfinite(r_pos) & np.isfinite(rp_pos) & np.isfinite(rp_neg) & fin_sym[len(u) + 1:] \
            & fin_sym[:len(u)][::-1]
        bad_at = float(u[~fin].min()) if (~fin).any() else None
        checks["finite_values"] = Check("finite_values", bool(fin.all()), float((~fin).sum()), bad_at,
                                        "r and r' finite on the sampled range")
        sym, r_sym = sym[fin_sym], r_sym[fin_sym]
        u, r_pos, rp_pos, rp_neg = u[fin], r_pos[fin], rp_pos[fin], rp_neg[fin]

        sign_ok = np.sign(r_sym) == np.sign(sym)
        r0 = float(p.r(0.0))
        worst = float(np.max(np.where(sign_ok, 0.0, 1.0))) + abs(r0)
        checks["odd_through_origin"] = Check("odd_through_origin", bool(sign_ok.all() and r0 == 0.0),
                                             worst, None, "r(0)=0 and sign(r(u))=sign(u)")

        inc = np.diff(r_sym)
        i = int(np.argmin(np.where(np.isfinite(inc), inc, -np.inf)))
        checks["strictly_increasing"] = Check("strictly_increasing", bool(np.all(inc > 0)),
                                              float(inc[i]), float(sym[i]))

        ev = np.abs(rp_pos - rp_neg) - 1e-12 * (1.0 + np.abs(rp_pos))
        w, at = _worst(ev, u)
        checks["r_prime_even"] = Check("r_prime_even", w <= 0, w, at)

        lower = r_pos / u - rp_pos * (1.0 + 1e-12)
        w, at = _worst(lower, u)
        checks["lower_bound"] = Check("lower_bound", w <= 0, w, at, "r(u)/u <= r'(u)")

        ratio = r_pos / u
        drop = ratio[:-1] - ratio[1:] * (1.0 + 1e-12)
        w, at = _worst(drop, u[:-1])
        checks["r_over_u_nondecreasing"] = Check("r_over_u_nondecreasing", w <= 0, w, at)

        beta = estimate_beta(p, u_range, n_samples)
        upper = rp_pos - beta * (r_pos / u) * (1.0 + 1e-12)
        w, at = _worst(upper, u)
        ok = (not p.beta_diverges) and np.isfinite(beta) and w <= 0
        checks["beta_bounded"] = Check("beta_bounded", bool(ok), beta, at,
                                       "still growing at range end" if p.beta_diverges else "")

        m = estimate_doubling(p, u_range, n_samples)
        checks["doubling"] = Check("doubling", bool(np.isfinite(m)), m, None, "r'(2u) <= m r'(u)")

        span = np.linspace(-1e3, 1e3, 2001)
        try:
            rt = np.abs(p.r_inverse(p.r(span)) - span) - 1e-9 * (1.0 + np.abs(span))
            w, at = _worst(rt, span)
            checks["round_trip"] = Check("round_trip", w <= 0, w, at, "r^-1(r(u)) = u")
        except (ValueError, ArithmeticError) as exc:
            checks["round_trip"] = Check("round_trip", False, float("inf"), None, str(exc))

        rp0 = float(p.r_prime(0.0))
        rp_inc = bool(np.all(np.diff(rp_pos) > 0))
        checks["r_prime_homeomorphism"] = Check(
            "r_prime_homeomorphism", rp_inc and rp0 == 0.0, rp0, 0.0,
            "r'(0)=0 and r' strictly increasing on sampled [0, inf)")

    if np.isfinite(beta) and abs(beta - 1.0) <= 1e-9:
        notes.append("beta = 1: linear profile, admitted as a degenerate test case")
        checks["r_prime_homeomorphism"].passed = True
        checks["r_prime_homeomorphism"].detail += " (waived for beta = 1)"

    passed = all(c.passed for c in checks.values())
    return ProfileReport(
        profile=p.name,
        passed=passed,
        checks=checks,
        beta_hat=beta,
        m_hat=m,
        warnings=notes,
        assumptions=["surjectivity of r' onto [0, inf) is assumed, not certified"],
    )
