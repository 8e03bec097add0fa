"""Beltrami coefficients in the Grushin frame agree with the plane ones after Phi."""

from grushin import Region, conjugated, conjugation_consistency, grushin_beltrami_nu, make_profile

p = make_profile("classical")
grid = Region(0.2, 2.0, -1.0, 1.0)
for spec in ("identity", "translation(0.5,0)", "moebius(1,0.5,0.2,1)", "antiholomorphic_mix(0.3)"):
    m = conjugated(p, spec)
    rep = conjugation_consistency(m, grid)
    nu = grushin_beltrami_nu(m, (1.0, 0.5))
    print(f"{spec:26s} nu(1, 0.5) = {nu.real:+.6f}{nu.imag:+.6f}i   max |nu - mu o Phi| = {rep.max_deviation:.2e}")
