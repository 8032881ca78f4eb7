"""Standard normal Dirichlet process mixtures and the posterior on the number of clusters."""

from .distribution import PosteriorOverT
from .errors import ConfigError, ContractError, ResourceLimitError
from .exact import exact_joint_over_t, posterior_over_t, r_statistic
from .gibbs import ChainConfig, GibbsState, estimate_posterior_t, gibbs_sweep, init_state
from .marginal import ClusterStat, ModelParams, log_h, log_p0, log_single_cluster_marginal
from .mfm import MfmConfig, mfm_posterior_s_assignments, mfm_posterior_s_partitions
from .partitions import (
    Partition,
    crp_log_mass,
    enumerate_partitions,
    log_rising_factorial,
    prior_num_clusters,
    sample_crp,
)

__version__ = "0.1.0"
