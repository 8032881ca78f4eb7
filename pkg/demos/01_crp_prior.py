"""
The CRP prior on the number of clusters
=======================================

Partitions of a small set, their CRP masses, and the implied prior on the
number of clusters t, cross-checked against a direct enumeration.
"""
import numpy as np

from dpmix.partitions import (bell_number, crp_log_mass, enumerate_partitions,
                              prior_num_clusters, sample_crp)

# every partition of {0, 1, 2, 3} with its mass under alpha = 1
n, alpha = 4, 1.0
for part in enumerate_partitions(n):
    print(f"{str(part):<22} {np.exp(crp_log_mass(part, alpha)):.4f}")
print("Bell numbers:", [bell_number(k) for k in range(1, 11)])

# the prior over t comes from a recurrence, no enumeration needed
for alpha in (0.5, 1.0, 2.0):
    prior = prior_num_clusters(10, alpha)
    print(f"alpha={alpha}: E[t]={prior.mean():.3f}  p(t)={np.round(prior.probs[:5], 4)}")

# a forward CRP draw agrees in distribution
rng = np.random.default_rng(0)
draws = np.array([sample_crp(10, 1.0, rng).t for _ in range(20_000)])
print("simulated E[t] at alpha=1:", draws.mean().round(3))
