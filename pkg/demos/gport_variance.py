# Leaves of plane-oriented recursive trees, and which variance formula is right
#
# For preferential attachment trees (alpha = 1) the variance series can be
# written with or without a (1-x)^(-1) factor in its weight function, and with
# either sign on the mu^2 term. Only one of the four readings matches the
# simulated variance; exact enumeration of small trees points the same way.

from tolltrees import builtin_toll, gport_constants, simulate
from tolltrees.oracle import exact_moments

leaf = builtin_toll("leaf")
variants = gport_constants(1, leaf).extras["sigma2_variants"]
for name, value in variants.items():
    print(f"{name:30s} {value:+.6f}")

# Exact variance increments Var L_n - Var L_(n-1), from all trees of size n.

prev = exact_moments("port", leaf, 3, 2, central=True)
for n in range(4, 9):
    cur = exact_moments("port", leaf, n, 2, central=True)
    print(f"n={n}  increment {cur - prev:.5f}")
    prev = cur

# And a simulation at n = 5000.

n = 5000
s = simulate("port", leaf, n, 20_000, seed=7)
print(f"simulated var / n = {s.variance / n:.5f}")
