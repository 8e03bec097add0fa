import json
import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin.profile import (
    InadmissibleProfileWarning,
    estimate_beta,
    estimate_doubling,
    make_profile,
    parse_profile,
    profile_from_descriptor,
    validate_profile,
)


def exp_profile():
    return make_profile("custom", {
        "name": "exp",
        "r": lambda u: np.sign(u) * np.expm1(np.abs(u)),
        "r_prime": lambda u: np.exp(np.abs(u)),
        "r_inverse": lambda x: np.sign(x) * np.log1p(np.abs(x)),
    })


def linear_profile():
    return make_profile("custom", {
        "name": "linear",
        "r": lambda u: np.asarray(u, dtype=float) * 1.0,
        "r_prime": lambda u: np.ones_like(np.asarray(u, dtype=float)),
        "r_inverse": lambda x: np.asarray(x, dtype=float) * 1.0,
    })


def test_classical_values():
    p = make_profile("classical")
    assert p.r(2.0) == 2.0 and p.r_prime(2.0) == 2.0 and p.r_inverse(2.0) == 2.0
    assert p.r(-3.0) == -4.5


def test_log_power_value_against_mpmath():
    p = make_profile("log_power", {"p": 2})
    mpmath.mp.dps = 30
    assert abs(p.r(1.0) - float(mpmath.log(2))) < 1e-15
    # r' against an arbitrary-precision derivative of u^2 log(1+u)
    for u in (0.3, 1.7, 12.0):
        ref = mpmath.diff(lambda t: t**2 * mpmath.log1p(t), u)
        assert abs(p.r_prime(u) - float(ref)) <= 1e-12 * float(abs(ref))


@pytest.mark.parametrize("family,params", [("power", {"alpha": 0}), ("power", {"alpha": -1}),
                                           ("log_power", {"p": 1}), ("nope", {})])
def test_rejects_bad_parameters(family, params):
    with pytest.raises(ValueError):
        make_profile(family, params)


def test_beta_and_doubling_closed_forms():
    p = make_profile("classical")
    assert abs(estimate_beta(p, (1e-3, 1e3), 600) - 2.0) <= 1e-9
    assert abs(estimate_doubling(p) - 2.0) <= 1e-9
    q = make_profile("power", {"alpha": 3})
    assert abs(estimate_beta(q) - 4.0) <= 1e-6  # u r'/r = alpha + 1
    assert abs(estimate_doubling(q) - 8.0) <= 1e-9  # 2^alpha
    assert estimate_doubling(linear_profile()) == 1.0


def test_exp_profile_flagged():
    p = exp_profile()
    with pytest.warns(InadmissibleProfileWarning):
        beta = estimate_beta(p, (1.0, 20.0), 600)
    # u e^u / (e^u - 1) at u = 20
    assert abs(beta - 20 * math.exp(20) / math.expm1(20)) < 1e-6
    assert p.beta_diverges
    rep = validate_profile(exp_profile())
    assert not rep.passed and "beta_bounded" in rep.failed()


@pytest.mark.parametrize("text", ["classical", "power:3", "log:2"])
def test_builtin_profiles_validate(text):
    rep = validate_profile(parse_profile(text))
    assert rep.passed, rep.failed()
    assert rep.assumptions


def test_linear_profile_passes_with_warning():
    rep = validate_profile(linear_profile())
    assert rep.passed
    assert rep.warnings


def test_descriptor_round_trip(tmp_path):
    p = parse_profile("power:2.5")
    desc = p.to_descriptor()
    assert desc == {"family": "power", "params": {"alpha": 2.5}}
    q = profile_from_descriptor(p.to_json())
    assert q.r(1.7) == p.r(1.7)
    f = tmp_path / "prof.json"
    f.write_text(json.dumps(desc))
    assert parse_profile(f"@{f}").r(1.7) == p.r(1.7)
    assert parse_profile(json.dumps({"family": "classical"})).r(2.0) == 2.0
    with pytest.raises(ValueError):
        linear_profile().to_descriptor()
    with pytest.raises(ValueError):
        parse_profile("power")


def test_certified_values_carry_safety_factor():
    p = make_profile("classical").certify()
    assert p.beta_certified > p.beta_hat and abs(p.beta_certified / p.beta_hat - 1 - 1e-6) < 1e-12


profiles = st.sampled_from(["classical", "power:0.5", "power:3", "log:2", "log:1.5"])
reals = st.floats(-1e3, 1e3, allow_nan=False)


@given(profiles, reals)
@settings(max_examples=200, deadline=None)
def test_profile_invariants(text, u):
    p = parse_profile(text)
    r, rp = float(p.r(u)), float(p.r_prime(u))
    assert float(p.r(-u)) == -r
    assert abs(rp - float(p.r_prime(-u))) <= 1e-12 * (1 + abs(rp))
    assert abs(float(p.r_inverse(r)) - u) <= 1e-9 * (1 + abs(u))
    if u != 0:
        assert r / u <= rp * (1 + 1e-12)


@given(profiles, reals, reals)
@settings(max_examples=100, deadline=None)
def test_strictly_increasing(text, a, b):
    p = parse_profile(text)
    if a < b:
        # r underflows to -0/0 for |u| below ~1e-80, so strictness is only checkable above that
        assert p.r(a) <= p.r(b)
        if all(x == 0 or abs(x) >= 1e-60 for x in (a, b)):
            assert p.r(a) < p.r(b)


def test_power_inverse_is_analytic():
    p = make_profile("power", {"alpha": 3})
    x = np.array([-7.0, 0.0, 2.5])
    assert np.allclose(p.r(p.r_inverse(x)), x, rtol=1e-14, atol=0)


def test_profile_evaluators_vectorize():
    p = parse_profile("log:2")
    u = np.linspace(-3, 3, 7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert p.r(u).shape == u.shape and p.r_inverse(p.r(u)).shape == u.shape
