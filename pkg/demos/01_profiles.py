"""Certify the built-in profiles and show an inadmissible one being caught."""

import warnings

import numpy as np

from grushin import make_profile, parse_profile, validate_profile

for text in ("classical", "power:3", "log:2"):
    rep = validate_profile(parse_profile(text))
    print(f"{text:10s} passed={rep.passed}  beta={rep.beta_hat:.6f}  m={rep.m_hat:.6f}")

# r(u) = sign(u)(e^|u| - 1): u r'/r grows like |u|, so no beta exists
exp = make_profile("custom", {
    "name": "exp",
    "r": lambda u: np.sign(u) * np.expm1(np.abs(u)),
    "r_prime": lambda u: np.exp(np.abs(u)),
    "r_inverse": lambda x: np.sign(x) * np.log1p(np.abs(x)),
})
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    rep = validate_profile(exp)
print(f"exp        passed={rep.passed}  failed checks: {', '.join(rep.failed())}")
