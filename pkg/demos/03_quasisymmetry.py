"""Monte-Carlo lower bounds for the weak quasisymmetry constant of Phi(u, v) = r(u) + iv.

c_emp is a sample maximum, so it creeps up with the sample size.
"""

from grushin import make_profile, weak_qs_sample

p = make_profile("classical")
for seed in (7, 11, 13):
    row = [weak_qs_sample(p, n_triples=n, seed=seed).c_emp for n in (10**3, 10**4, 10**5)]
    print(f"seed {seed:2d}: " + "  ".join(f"{c:.4f}" for c in row))

rep = weak_qs_sample(p, n_triples=10**5, seed=7)
print("worst triple:", rep.worst_triple)
