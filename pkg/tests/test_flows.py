import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin.calculus import Region
from grushin.errors import BlowUpError, BranchDomainError, DivergenceError
from grushin.flows import (
    FlowSpec,
    b_closed,
    branch_domain_contains,
    closed_form_flow,
    flow_conformality_check,
    flow_map,
    flow_rhs,
    integrate_flow,
    integrate_flow_adaptive,
    xi_eta,
)
from grushin.profile import parse_profile

CLASSICAL = parse_profile("classical")
PROFILES = [parse_profile(t) for t in ("classical", "power:3", "log:2")]


def safe_points(spec, n, seed, frac=0.8):
    """Seeded points with |Phi(w)| below ``frac`` of the safe radius (or 2 when unbounded)."""
    rng = np.random.default_rng(seed)
    rad = min(spec.safe_radius, 2.5) * frac
    rho = rad * np.sqrt(rng.random(n))
    th = rng.uniform(0, 2 * np.pi, n)
    x, y = rho * np.cos(th), rho * np.sin(th)
    return np.asarray(spec.profile.r_inverse(x), dtype=float), y


def test_spec_fields():
    assert FlowSpec(4, 1.0, CLASSICAL).alpha == 4 and FlowSpec(5, 1.0, CLASSICAL).alpha == 8
    assert FlowSpec(2, 1.0, CLASSICAL).alpha is None
    assert abs(FlowSpec(4, 1.0, CLASSICAL).safe_radius - (1 / 3) ** (1 / 3)) < 1e-15
    with pytest.raises(ValueError):
        FlowSpec(0, 1.0, CLASSICAL)
    with pytest.raises(ValueError):
        FlowSpec(3, -1.0, CLASSICAL)


def test_field_examples():
    f1 = xi_eta(FlowSpec(1, 0, CLASSICAL))
    assert f1(3.0, -2.0) == (0.0, 1.0)
    f3 = xi_eta(FlowSpec(3, 0, CLASSICAL))
    assert f3.xi(1.0, 1.0) == 1.0 and f3.eta(1.0, 1.0) == 0.75
    assert f3.b(1.0, 1.0) == 1 + 0.75j
    # b_3 = -i Phi^2 = -i (1/2 + i)^2
    assert abs(b_closed(FlowSpec(3, 0, CLASSICAL), 1.0, 1.0) - (-1j * (0.5 + 1j) ** 2)) < 1e-15
    assert flow_rhs(FlowSpec(1, 0, CLASSICAL), (7, 7)) == (0.0, 1.0)
    assert flow_rhs(FlowSpec(2, 0, CLASSICAL), (2, 5)) == (1.0, 5.0)
    assert flow_rhs(FlowSpec(3, 0, CLASSICAL), (1, 1)) == (1.0, 0.75)
    # the k = 2 field is continuous across the axis
    assert flow_rhs(FlowSpec(2, 0, CLASSICAL), (0, 3)) == (0.0, 3.0)


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("p", PROFILES, ids=lambda p: p.name)
def test_b_recursion_matches_power(k, p):
    spec = FlowSpec(k, 0, p)
    rng = np.random.default_rng(k)
    x, y = rng.uniform(-3, 3, 1000), rng.uniform(-3, 3, 1000)
    f = xi_eta(spec)
    b = f.b(x, y)
    assert np.max(np.abs(b - (p.r_prime(x) * f.xi(x, y) + 1j * f.eta(x, y)))) <= 1e-12
    z = np.abs(p.r(x) + 1j * y)
    assert np.all(np.abs(b - b_closed(spec, x, y)) <= 1e-10 * (1 + z ** spec.alpha))


def test_closed_form_examples():
    assert closed_form_flow(FlowSpec(1, 2, CLASSICAL), (3, 4)) == (3.0, 6.0)
    g = closed_form_flow(FlowSpec(2, 2, CLASSICAL), (1, 1))
    assert abs(g.u - math.e) < 1e-14 and abs(g.v - math.e**2) < 1e-13
    assert closed_form_flow(FlowSpec(3, 0.7, CLASSICAL), (0, 0)) == (0.0, 0.0)
    # k = 3 conjugate is z / (1 + izs)
    z = 0.5 + 1j
    g = closed_form_flow(FlowSpec(3, 0.5, CLASSICAL), (1, 1))
    w = z / (1 + 1j * z * 0.5)
    assert abs(CLASSICAL.r(g.u) - w.real) < 1e-14 and abs(g.v - w.imag) < 1e-14


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_identity_at_time_zero(k):
    for p in PROFILES:
        for w in [(0.3, -1.7), (0.0, 2.0), (-5.5, 0.1)]:
            assert closed_form_flow(FlowSpec(k, 0.0, p), w) == w


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_semigroup(k):
    s1, s2 = 0.13, 0.21
    for p in PROFILES:
        full = FlowSpec(k, s1 + s2, p)
        u, v = safe_points(full, 100, seed=k, frac=0.6)
        for a, b in zip(u, v):
            mid = closed_form_flow(FlowSpec(k, s1, p), (a, b))
            two = closed_form_flow(FlowSpec(k, s2, p), mid)
            one = closed_form_flow(full, (a, b))
            assert abs(two.u - one.u) <= 1e-9 * (1 + abs(one.u))
            assert abs(two.v - one.v) <= 1e-9 * (1 + abs(one.v))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_time_derivative_is_b(k):
    s, ds = 0.3, 1e-4
    p = CLASSICAL
    spec = FlowSpec(k, s, p)
    u, v = safe_points(FlowSpec(k, s + ds, p), 100, seed=10 + k, frac=0.6)
    plus = flow_map(spec.at_time(s + ds), u, v)
    minus = flow_map(spec.at_time(s - ds), u, v)
    here = flow_map(spec, u, v)
    dphi = ((p.r(plus[0]) + 1j * plus[1]) - (p.r(minus[0]) + 1j * minus[1])) / (2 * ds)
    b = xi_eta(spec).b(*here)
    assert np.all(np.abs(dphi - b) <= 1e-5 * np.maximum(np.abs(b), 1.0))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_rk4_against_closed_form(k):
    for s in (0.1, 0.5):
        spec = FlowSpec(k, s, CLASSICAL)
        u, v = safe_points(spec, 50, seed=20 + k, frac=0.7)
        err = 0.0
        for a, b in zip(u, v):
            exact = closed_form_flow(spec, (a, b))
            num = integrate_flow(spec, (a, b), 64)
            err = max(err, abs(num.u - exact.u), abs(num.v - exact.v))
        assert err <= 1e-6


def test_rk4_exact_for_k1():
    spec = FlowSpec(1, 2.5, CLASSICAL)
    assert integrate_flow(spec, (1.5, -1.0), 3) == closed_form_flow(spec, (1.5, -1.0))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_rk4_order(k):
    spec = FlowSpec(k, 0.5, CLASSICAL)
    w = (0.8, 0.3)
    exact = closed_form_flow(spec, w)
    errs = [max(abs(a - b) for a, b in zip(integrate_flow(spec, w, n), exact)) for n in (8, 16, 32)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 3.6
    assert errs[0] / errs[1] >= 12


def test_trajectory_shape_and_adaptive():
    spec = FlowSpec(3, 0.5, CLASSICAL)
    traj = integrate_flow(spec, (1, 1), 8, trajectory=True)
    assert traj.shape == (9, 3) and traj[0, 0] == 0 and abs(traj[-1, 0] - 0.5) < 1e-15
    exact = closed_form_flow(spec, (1, 1))
    ad = integrate_flow_adaptive(spec, (1, 1), tol=1e-9)
    assert abs(ad.u - exact.u) < 1e-8 and abs(ad.v - exact.v) < 1e-8


def test_branch_domain_examples():
    p = CLASSICAL
    spec = FlowSpec(4, 1.0, p)

    def at(z):
        return (p.r_inverse(z.real), z.imag)

    assert not branch_domain_contains(spec, at(1j))
    assert branch_domain_contains(spec, at(0.1j))
    for ang in (7 * math.pi / 6, 11 * math.pi / 6):
        assert not branch_domain_contains(spec, at(1.2 * complex(math.cos(ang), math.sin(ang))))
        assert branch_domain_contains(spec, at(0.5 * complex(math.cos(ang), math.sin(ang))))
    # off the rays the k = 4 map is defined far out
    assert branch_domain_contains(spec, at(5 * complex(math.cos(0.3), math.sin(0.3))))
    s3 = FlowSpec(3, 0.5, p)
    assert not branch_domain_contains(s3, at(2j))
    assert branch_domain_contains(s3, at(2j + 1e-3))
    assert branch_domain_contains(FlowSpec(2, 9.0, p), (0, 1e9))


RAYS = (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)


@given(st.floats(0, 2 * math.pi), st.floats(0.01, 5), st.floats(0.05, 2))
@settings(max_examples=300, deadline=None)
def test_k4_excluded_set_is_three_rays(theta, rho, s):
    spec = FlowSpec(4, s, CLASSICAL)
    R = spec.safe_radius
    off_ray = min(abs(math.remainder(theta - t, 2 * math.pi)) for t in RAYS) > 1e-3
    z = rho * complex(math.cos(theta), math.sin(theta))
    if off_ray and abs(rho - R) > 1e-2 * R:
        assert branch_domain_contains(spec, (CLASSICAL.r_inverse(z.real), z.imag))
    if rho > 1.01 * R:
        for t in RAYS:
            zr = rho * complex(math.cos(t), math.sin(t))
            assert not branch_domain_contains(spec, (CLASSICAL.r_inverse(zr.real), zr.imag))


def test_errors():
    with pytest.raises(BlowUpError):
        closed_form_flow(FlowSpec(3, 0.5, CLASSICAL), (0, 2))
    with pytest.raises(BranchDomainError):
        closed_form_flow(FlowSpec(4, 1.0, CLASSICAL), (0, 1))
    with pytest.raises(DivergenceError) as exc:
        integrate_flow(FlowSpec(3, 0.5, CLASSICAL), (0, 2.5), 64)
    # blow-up at t = 1/2.5 = 0.4, i.e. between steps 51 and 52
    assert exc.value.step == 52
    with pytest.raises(ValueError):
        integrate_flow(FlowSpec(3, 0.5, CLASSICAL), (1, 1), 0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("s", [0.1, 0.5])
def test_flow_conformality(k, s):
    region = Region(0.3, 2, -1, 1) if k < 4 else Region(0.3, 0.9, -0.4, 0.4)
    cert = flow_conformality_check(FlowSpec(k, s, CLASSICAL), region)
    assert cert.passed
    assert cert.max_diag_deviation <= 1e-5 and cert.max_offdiag_deviation <= 1e-5
    assert cert.nu_max_abs <= 1e-5


def test_flow_conformality_other_profiles():
    for p in PROFILES[1:]:
        assert flow_conformality_check(FlowSpec(3, 0.1, p), Region(0.3, 1.5, -1, 1)).passed


def test_flow_conformality_preconditions():
    with pytest.raises(BranchDomainError):
        flow_conformality_check(FlowSpec(1, 0.1, CLASSICAL), Region(-1, 1, -1, 1))
    # straddles the 7 pi / 6 ray of the k = 4, s = 0.2 map (|z| beyond (1/0.6)^(1/3) ~ 1.19)
    with pytest.raises(BranchDomainError):
        flow_conformality_check(FlowSpec(4, 0.2, CLASSICAL), Region(-2.2, -1.2, -1.4, -0.4))
    # k = 2 dilation in the paper's form (u e^{s/2}, v e^s) on off-axis regions
    g = closed_form_flow(FlowSpec(2, 0.5, CLASSICAL), (1.3, -0.7))
    assert abs(g.u - 1.3 * math.exp(0.25)) < 1e-14 and abs(g.v + 0.7 * math.exp(0.5)) < 1e-14
