"""Quasidistance against estimated Carnot-Caratheodory length.

For the classical plane the distance from the origin to (0, 1) is sqrt(2 pi);
the L-shaped detour gives 2 sqrt(2) and coordinate descent closes most of the gap.
"""

import math

from grushin import cc_estimate, cc_upper_lshape, make_profile, quasidistance

p = make_profile("classical")
w, w2 = (0.0, 0.0), (0.0, 1.0)
d = quasidistance(p, w, w2)
lshape, _ = cc_upper_lshape(p, w, w2)
est, path = cc_estimate(p, w, w2, n_nodes=16, n_iters=4)
print(f"quasidistance {d.value:.4f} ({d.branch})")
print(f"L-shape       {lshape:.4f}")
print(f"descent       {est:.4f}   sweeps: {', '.join(f'{h:.4f}' for h in path.history)}")
print(f"exact         {math.sqrt(2 * math.pi):.4f}")

print("\nratio cc/d across the plane")
for pair in [((1, 0), (1, 4)), ((3, -1), (-2, 2)), ((0.1, 0), (0.1, 0.01)), ((4, 0), (4.5, 0.2))]:
    d = quasidistance(p, *pair).value
    cc, _ = cc_estimate(p, *pair)
    print(f"  {pair}: d={d:.4f} cc={cc:.4f} cc/d={cc / d:.3f}")
