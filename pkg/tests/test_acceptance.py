"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line
(also collected into the pytest terminal summary). Run standalone with
``python tests/test_acceptance.py``."""

import math
import time
import warnings

import numpy as np
import pytest

from grushin.calculus import Region, conformality_test, conjugation_consistency
from grushin.flows import FlowSpec, b_closed, closed_form_flow, flow_conformality_check, integrate_flow, xi_eta
from grushin.maps import conjugated
from grushin.metric import cc_estimate, covering_rows, quasidistance, solve_M
from grushin.profile import InadmissibleProfileWarning, estimate_beta, estimate_doubling, make_profile, parse_profile
from grushin.symmetry import lemma32_check, lemma33_check, weak_qs_sample

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

BUILTIN = ("classical", "power:3", "log:2")


def report(n, title, ok, detail, elapsed, budget):
    ok = bool(ok and elapsed < budget)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} | {detail} | {elapsed:.2f}s (budget {budget}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_01_M_residual():
    t0 = time.perf_counter()
    dv = np.geomspace(1e-8, 1e8, 100)
    worst = 0.0
    for text in BUILTIN:
        p = parse_profile(text)
        M = solve_M(p, dv)
        worst = max(worst, float(np.max(np.abs(M * p.r_prime(M) - dv) / (1e-10 * (1 + dv)))))
    el = time.perf_counter() - t0
    assert report(1, "M-equation residual", worst <= 1, f"max residual/budget = {worst:.3g}", el, 1.0)


def test_criterion_02_comparability():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_up = worst_low = 0.0
    for text in BUILTIN:
        p = parse_profile(text).certify()
        pts = rng.uniform(-5, 5, size=(200, 2, 2))
        for w, w2 in pts:
            d = quasidistance(p, w, w2).value
            cc, _ = cc_estimate(p, w, w2)
            worst_up = max(worst_up, cc / (5 * d * (1 + 1e-6)))
            worst_low = max(worst_low, d / (2 * p.m_hat * cc * (1 + 1e-6)))
    el = time.perf_counter() - t0
    ok = worst_up <= 1 and worst_low <= 1
    assert report(2, "metric comparability", ok,
                  f"max cc/(5d) = {worst_up:.4f}, max d/(2m cc) = {worst_low:.4f}", el, 60.0)


def test_criterion_03_profile_certificates():
    t0 = time.perf_counter()
    c = make_profile("classical")
    beta_c, m_c = estimate_beta(c), estimate_doubling(c)
    beta_p = estimate_beta(make_profile("power", {"alpha": 3}))
    bad = make_profile("custom", {
        "name": "exp",
        "r": lambda u: np.sign(u) * np.expm1(np.abs(u)),
        "r_prime": lambda u: np.exp(np.abs(u)),
        "r_inverse": lambda x: np.sign(x) * np.log1p(np.abs(x)),
    })
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        estimate_beta(bad, (1.0, 20.0))
    flagged = bad.beta_diverges and any(issubclass(w.category, InadmissibleProfileWarning) for w in caught)
    el = time.perf_counter() - t0
    ok = abs(beta_c - 2) <= 1e-9 and abs(m_c - 2) <= 1e-9 and abs(beta_p - 4) <= 1e-6 and flagged
    assert report(3, "profile certificates", ok,
                  f"classical beta={beta_c!r} m={m_c!r}; power:3 beta={beta_p!r}; exp flagged={flagged}", el, 1.0)


def test_criterion_04_weak_qs_stability():
    t0 = time.perf_counter()
    p = make_profile("classical")
    parts, ok = [], True
    for seed in (7, 11, 13):
        small = weak_qs_sample(p, (-5, 5, -5, 5), 1000, seed).c_emp
        big = weak_qs_sample(p, (-5, 5, -5, 5), 10_000, seed).c_emp
        gap = abs(big - small) / big
        ok &= math.isfinite(big) and gap <= 0.1
        parts.append(f"seed {seed}: c(1e3)={small:.4f} c(1e4)={big:.4f} gap={gap:.3f}")
    el = time.perf_counter() - t0
    assert report(4, "weak quasisymmetry stability", ok, "; ".join(parts), el, 30.0)


def _pairs(p, which, n, rng):
    out = []
    check = lemma32_check if which == 32 else lemma33_check
    while len(out) < n:
        w, w2 = rng.uniform(-5, 5, size=(2, 2))
        r = check(p, tuple(w), tuple(w2))
        if r.applicable:
            out.append(r)
    return out


def test_criterion_05_lemma_bounds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    ok, parts = True, []
    for text in BUILTIN:
        p = parse_profile(text).certify()
        for which in (32, 33):
            reps = _pairs(p, which, 200, rng)
            worst = max(max(r.ratio_up, r.ratio_down) for r in reps)
            bound = reps[0].bound
            ok &= worst <= bound
            parts.append(f"{text} {'far' if which == 32 else 'near'}: {worst:.3f}<={bound:.3f}")
    el = time.perf_counter() - t0
    assert report(5, "comparison lemma bounds", ok, "; ".join(parts), el, 5.0)


def test_criterion_06_beltrami_consistency():
    t0 = time.perf_counter()
    p = make_profile("classical")
    grid = Region(0.2, 2.0, -1.0, 1.0, 25, 25)
    worst = {}
    for spec in ("identity", "translation(0.5,0)", "dilation(2)", "antiholomorphic_mix(0.3)",
                 "payne_closed_form(3,0.1)"):
        worst[spec] = conjugation_consistency(conjugated(p, spec), grid, h=1e-4).max_deviation
    el = time.perf_counter() - t0
    top = max(worst.values())
    assert report(6, "Beltrami consistency", top <= 1e-4, f"max |nu - mu o Phi| = {top:.3g}", el, 10.0)


def test_criterion_07_flow_conformality():
    t0 = time.perf_counter()
    p = make_profile("classical")
    ok, worst = True, 0.0
    for k in (1, 2, 3, 4):
        for s in (0.1, 0.5):
            region = Region(0.3, 2, -1, 1) if k < 4 else Region(0.3, 0.9, -0.4, 0.4)
            c = flow_conformality_check(FlowSpec(k, s, p), region)
            dev = max(c.max_diag_deviation, c.max_offdiag_deviation, c.nu_max_abs)
            worst = max(worst, dev)
            ok &= c.passed and dev <= 1e-5
    trans = conformality_test(conjugated(p, "translation(0.5,0)"), Region(-2, -0.3, -1, 1))
    ok &= not trans.passed
    el = time.perf_counter() - t0
    assert report(7, "conformality of flows", ok,
                  f"max deviation {worst:.3g}; translation fails across u=-1: {not trans.passed}", el, 20.0)


def test_criterion_08_flow_integration():
    t0 = time.perf_counter()
    p = make_profile("classical")
    rng = np.random.default_rng(8)
    sup_err, orders = 0.0, []
    for k in (1, 2, 3, 4):
        spec = FlowSpec(k, 0.5, p)
        rad = min(spec.safe_radius, 2.5) * 0.7
        rho, th = rad * np.sqrt(rng.random(50)), rng.uniform(0, 2 * np.pi, 50)
        for x, y in zip(rho * np.cos(th), rho * np.sin(th)):
            w = (float(p.r_inverse(x)), float(y))
            exact = closed_form_flow(spec, w)
            num = integrate_flow(spec, w, 64)
            sup_err = max(sup_err, abs(num.u - exact.u), abs(num.v - exact.v))
        if k > 1:
            w = (0.8, 0.3)
            exact = closed_form_flow(spec, w)
            e1, e2 = (max(abs(a - b) for a, b in zip(integrate_flow(spec, w, n), exact)) for n in (16, 32))
            orders.append(math.log2(e1 / e2))
    rel = 0.0
    for k in (3, 4, 5):
        spec = FlowSpec(k, 0.0, p)
        x, y = rng.uniform(-3, 3, 1000), rng.uniform(-3, 3, 1000)
        z = np.abs(p.r(x) + 1j * y)
        diff = np.abs(xi_eta(spec).b(x, y) - b_closed(spec, x, y)) / (1 + z**spec.alpha)
        rel = max(rel, float(diff.max()))
    el = time.perf_counter() - t0
    ok = sup_err <= 1e-6 and min(orders) >= 3.6 and rel <= 1e-10
    assert report(8, "flow integration", ok,
                  f"sup err {sup_err:.3g}; min order {min(orders):.2f}; b rel err {rel:.3g}", el, 10.0)


def test_criterion_09_covering():
    t0 = time.perf_counter()
    p = make_profile("classical")
    eps = [2.0**-j for j in range(3, 8)]
    near = [r[2] for r in covering_rows(p, ((0.0, 0.0), 1.0), eps)]
    far = [n * e**2 for e, n, _ in covering_rows(p, ((2.0, 0.0), 1.0), eps)]
    rn, rf = max(near) / min(near), max(far) / min(far)
    el = time.perf_counter() - t0
    assert report(9, "non-Ahlfors covering", rn <= 2 and rf <= 2,
                  f"near-axis spread {rn:.3f}; control spread {rf:.3f}", el, 60.0)


def test_criterion_10_semigroup_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    ok, worst = True, 0.0
    for text in BUILTIN:
        p = parse_profile(text)
        for k in (1, 2, 3):
            for _ in range(100):
                w = tuple(rng.uniform(-1.5, 1.5, 2))
                ok &= closed_form_flow(FlowSpec(k, 0.0, p), w) == w
                s1, s2 = rng.uniform(0, 0.25, 2)
                one = closed_form_flow(FlowSpec(k, s1 + s2, p), w)
                two = closed_form_flow(FlowSpec(k, s2, p), closed_form_flow(FlowSpec(k, s1, p), w))
                err = max(abs(one.u - two.u) / (1 + abs(one.u)), abs(one.v - two.v) / (1 + abs(one.v)))
                worst = max(worst, err)
    ok &= worst <= 1e-9
    el = time.perf_counter() - t0
    assert report(10, "semigroup and identity", ok, f"max composition error {worst:.3g}", el, 5.0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
