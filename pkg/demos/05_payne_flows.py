"""Payne flows: closed form against RK4, and conformality of the time-s maps."""

from grushin import FlowSpec, Region, closed_form_flow, flow_conformality_check, integrate_flow, make_profile

p = make_profile("classical")
w = (1.0, 1.0)
for k in (1, 2, 3, 4):
    spec = FlowSpec(k, 0.5, p)
    exact = closed_form_flow(spec, w) if k < 4 else closed_form_flow(spec, (0.5, 0.2))
    start = w if k < 4 else (0.5, 0.2)
    errs = []
    for n in (8, 16, 32, 64):
        g = integrate_flow(spec, start, n)
        errs.append(max(abs(g.u - exact.u), abs(g.v - exact.v)))
    print(f"k={k}: g(s=0.5) = ({exact.u:.6f}, {exact.v:.6f})  RK4 errors " +
          " ".join(f"{e:.1e}" for e in errs))

print()
for k in (1, 2, 3, 4):
    region = Region(0.3, 2, -1, 1) if k < 4 else Region(0.3, 0.9, -0.4, 0.4)
    cert = flow_conformality_check(FlowSpec(k, 0.5, p), region)
    print(f"k={k}: conformal={cert.passed}  max |nu|={cert.nu_max_abs:.1e}")
