"""
Collapsed Gibbs sampling
========================

The sampler is checked against the exact posterior at n = 8 and then run
where enumeration is out of reach.
"""
import numpy as np

from dpmix.exact import posterior_over_t
from dpmix.gibbs import ChainConfig, estimate_posterior_t

xs = np.random.default_rng(2).standard_normal(8)
exact = posterior_over_t(xs)
est = estimate_posterior_t(xs, 1.0, ChainConfig(seed=1))
print("t   exact   gibbs   se")
for t in range(1, 6):
    print(f"{t}  {exact.p(t):.4f}  {est.p(t):.4f}  {est.std_errors[t - 1]:.4f}")
print("total variation:", round(est.total_variation(exact), 4))

# larger n: shorter chains are plenty to see where the mass sits
big = np.random.default_rng(3).standard_normal(500)
est = estimate_posterior_t(big, 1.0, ChainConfig(3000, 500, 2, seed=4))
print(f"n=500: p(T=1|x)={est.p(1):.4f} (se {est.std_errors[0]:.4f}), mode t={est.mode()}")
