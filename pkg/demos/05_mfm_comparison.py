"""
Mixture of finite mixtures versus the DP mixture
================================================

With a prior on the number of components the posterior puts its weight on
s = 1 for single-cluster data, where the DP mixture spreads over many t.
"""
import numpy as np

from dpmix.exact import posterior_over_t
from dpmix.mfm import MfmConfig, mfm_posterior_s_assignments, mfm_posterior_s_partitions

cfg = MfmConfig.geometric(4, gamma=1.0)
xs = np.random.default_rng(6).standard_normal(8)

a = mfm_posterior_s_assignments(xs, cfg)
b = mfm_posterior_s_partitions(xs, cfg)
print("MFM p(s|x), two routes:", np.round(a.probs, 6), np.round(b.probs, 6))
print("DPM p(t|x):            ", np.round(posterior_over_t(xs).probs[:4], 6))

wins = sum(mfm_posterior_s_partitions(x, cfg).p(1) > posterior_over_t(x).p(1)
           for x in (np.random.default_rng(100 + r).standard_normal(10) for r in range(20)))
print(f"MFM puts more mass on one cluster in {wins}/20 datasets")
