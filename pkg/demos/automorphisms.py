# How symmetric is a random binary increasing tree?
#
# Forget labels and slot positions and count the automorphisms of the shape.
# log|Aut(T)| is additive: the toll is log R(T), where R counts the ways to
# permute isomorphic root branches. Its variance grows linearly in n, so
# |Aut(T)| itself is asymptotically log-normal.

import numpy as np

from tolltrees import builtin_toll, grow_dary, simulate
from tolltrees.tolls import automorphism_group_order, evaluate_additive

toll = builtin_toll("log-branch-symmetry")

# A small example first: the additive value equals log of the brute group order.

t = grow_dary(2, 12, np.random.default_rng(3))
print(t.to_text())
print("|Aut| =", automorphism_group_order(t), " exp(F) =", round(np.exp(evaluate_additive(toll, t).value)))

# Variance per vertex at two sizes; the two ratios should roughly agree.

for n in (500, 2000):
    s = simulate("dary:2", toll, n, 20_000, seed=n)
    print(f"n={n:5d}  mean/n={s.mean / n:.5f}  var/n={s.variance / n:.5f}  skew={s.skewness:+.3f}")
