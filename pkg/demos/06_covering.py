"""Covering numbers of unit squares by quasidistance balls.

Touching the singular line the count grows like eps^-2 ln(1/eps), so the
metric is not Ahlfors 2-regular there; away from it the count is ~ eps^-2.
"""

from grushin import make_profile
from grushin.metric import covering_rows

p = make_profile("classical")
eps = [2.0**-j for j in range(3, 10)]
print("   eps      N(axis)   N eps^2/ln(1/eps)   N(control)   N eps^2")
for (e, n, ratio), (_, m, _) in zip(covering_rows(p, ((0, 0), 1), eps), covering_rows(p, ((2, 0), 1), eps)):
    print(f"{e:8.5f} {n:10d} {ratio:16.4f} {m:14d} {m * e * e:10.4f}")
