"""
Exact posterior over the number of clusters
===========================================

For n up to 13 the posterior p(t | x) under the standard normal DP mixture
is computed by summing over every set partition.
"""
import numpy as np

from dpmix.diagnostics import p1_upper_bound
from dpmix.exact import partition_posterior, posterior_over_t

rng = np.random.default_rng(1)

# one cluster's worth of N(0, 1) data
for n in (2, 5, 8, 12):
    xs = rng.standard_normal(n)
    post = posterior_over_t(xs)
    print(f"n={n:>2}  p(T=1|x)={post.p(1):.4f}  ceiling={p1_upper_bound(xs):.4f}  "
          f"mode={post.mode()}  E[t]={post.mean():.3f}")

# the most probable partitions of a small dataset
xs = np.array([-1.2, -0.9, 0.1, 2.5, 2.7])
top = sorted(partition_posterior(xs, 1.0), key=lambda pair: -pair[1])[:5]
for part, prob in top:
    print(f"{str(part):<24} {prob:.4f}")
