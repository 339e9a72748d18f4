# Leaves of random binary increasing trees
#
# The number of leaves is the additive functional with toll f(T) = 1 when T is
# a single vertex. Its mean and variance both grow linearly, and the
# constants can be computed exactly.

from tolltrees import builtin_toll, fringe_constants, sigma2_enumeration, simulate, normality_report

leaf = builtin_toll("leaf")

# Exact constants as fractions.

fc = fringe_constants(2, "size", 1)
print("mu     =", fc.extras["mu_exact"], "=", fc.mu)
print("sigma2 =", fc.extras["sigma2_exact"], "=", fc.sigma2)

# The same numbers from the truncated double series over all small trees.
# Size-only tolls converge immediately, so every truncation gives 2/45.

res = sigma2_enumeration(2, leaf, K=5)
print("truncations:", [round(s, 12) for s in res.sigma2_sequence])

# Now simulate 20000 trees with 5000 vertices and compare.

n = 5000
stats = simulate("dary:2", leaf, n, 20_000, seed=1)
rep = normality_report(stats, fc)
print(f"mean      {stats.mean:.2f}  (predicted {fc.predicted_mean(n):.2f})")
print(f"var / n   {stats.variance / n:.5f}  (predicted {fc.sigma2:.5f})")
print(f"skewness  {rep.skewness:+.4f}  kurtosis {rep.excess_kurtosis:+.4f}  KS {rep.ks_statistic:.4f}")
