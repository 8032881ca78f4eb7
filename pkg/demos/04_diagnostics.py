"""
Inequality diagnostics
======================

Two-block split inequality, the p(T=2)/p(T=1) ratio bound, U-statistics of
h and the bounds on the R statistics.
"""
import numpy as np

from dpmix import diagnostics as d

rng = np.random.default_rng(5)
xs = rng.standard_normal(10)

# slack of the split inequality over every two-block split
slacks = d.all_split_slacks(xs)
print(f"{slacks.size} splits, min slack {slacks.min():.3e}")

ratio, bound = d.proposition_ratio_bound(xs)
print(f"log p(x,T=2)/p(x,T=1) = {ratio:.4f} >= {bound:.4f}")

# U_k at large n: sampled subsets with a batch-means error bar
big = rng.standard_normal(10_000)
for k in (1, 2, 5):
    rep = d.u_statistic(big, k, budget=10 ** 5, rng=rng)
    err = "exact" if rep.exact else f"+- {rep.std_error:.4f}"
    print(f"U_{k} = {rep.value:.4f} {err}")

# R_2 grows past its lower bound; R_1 stays below exp(Z^2 / 2)
log_r1, log_r2 = d.r_statistics(xs)
print(f"log R1 = {log_r1:.4f} <= {d.r1_bound_log(xs):.4f}")
print(f"log R2 = {log_r2:.4f} >= {d.r2_lower_bound(xs, xs.size - 1):.4f}")
