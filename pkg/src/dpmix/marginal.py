"""Single-cluster marginals for the conjugate normal DPM.

Components are ``N(theta, obs_var)`` with ``theta ~ N(prior_mean, prior_var)``.
The defaults (0, 1, 1) give the standard normal DPM, where

    m(x_S) = (|S| + 1)**-0.5 * p0(x_S) * exp(0.5 * sum(x_S)**2 / (|S| + 1))

and ``h(x_S) = m(x_S) / p0(x_S)`` depends on the data only through the
cluster size and sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ClusterStat:
    """Sufficient statistics (size, sum) of one cluster."""

    size: int
    sum: float

    def __post_init__(self):
        if self.size < 1:
            raise ContractError(f"cluster size must be >= 1, got {self.size}")

    @classmethod
    def of(cls, xs: Sequence[float]) -> "ClusterStat":
        xs = np.asarray(xs, dtype=float)
        return cls(len(xs), float(xs.sum()))


@dataclass(frozen=True)
class ModelParams:
    prior_mean: float = 0.0
    prior_var: float = 1.0
    obs_var: float = 1.0

    def __post_init__(self):
        if not (self.prior_var > 0 and self.obs_var > 0):
            raise ContractError("prior_var and obs_var must be positive")

    @property
    def is_standard(self) -> bool:
        return (self.prior_mean, self.prior_var, self.obs_var) == (0.0, 1.0, 1.0)


STANDARD = ModelParams()


def log_p0(xs: Sequence[float]) -> float:
    """Log density of ``xs`` under i.i.d. ``N(0, 1)``."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ContractError("log_p0 needs a nonempty sequence")
    return float(-0.5 * xs.size * LOG_2PI - 0.5 * np.dot(xs, xs))


def log_base_density(xs, params: ModelParams = STANDARD) -> float:
    """Log density of ``xs`` under i.i.d. ``N(prior_mean, obs_var)``."""
    xs = np.asarray(xs, dtype=float)
    d = xs - params.prior_mean
    return float(-0.5 * xs.size * (LOG_2PI + np.log(params.obs_var))
                 - 0.5 * np.dot(d, d) / params.obs_var)


def log_cluster_factor(size, centered_sum, params: ModelParams = STANDARD):
    """``log m(x_S) - log_base_density(x_S)``; vectorized over numpy arrays.

    ``centered_sum`` is ``sum(x_S - prior_mean)``. For the standard model this
    is exactly ``log h``. Sizes of zero give 0 (an empty block contributes
    nothing).
    """
    size = np.asarray(size, dtype=float)
    ratio = params.prior_var / params.obs_var
    denom = params.obs_var + size * params.prior_var
    return (-0.5 * np.log1p(size * ratio)
            + 0.5 * ratio * np.square(centered_sum) / denom)


def log_single_cluster_marginal(stat: ClusterStat, params: ModelParams = STANDARD,
                                xs: Sequence[float] = None) -> float:
    """Log marginal likelihood ``log m(x_S)`` of one cluster.

    ``xs`` supplies the data needed for the non-cancelling base-density
    factor and must agree with ``stat``.
    """
    if xs is None:
        raise ContractError("xs is required to evaluate the full marginal")
    xs = np.asarray(xs, dtype=float)
    if xs.size != stat.size or not np.isclose(xs.sum(), stat.sum, rtol=1e-12, atol=1e-9):
        raise ContractError(
            f"ClusterStat(size={stat.size}, sum={stat.sum}) does not match data "
            f"(size={xs.size}, sum={xs.sum()})")
    centered = stat.sum - stat.size * params.prior_mean
    return float(log_base_density(xs, params) + log_cluster_factor(stat.size, centered, params))


def log_h(stat: ClusterStat) -> float:
    """``log(m(x_S) / p0(x_S))`` for the standard normal DPM."""
    k = stat.size
    return float(-0.5 * np.log(k + 1) + 0.5 * stat.sum ** 2 / (k + 1))


def log_predictive(x, size, total, params: ModelParams = STANDARD):
    """Log posterior predictive of ``x`` given a cluster with ``size`` and ``total``.

    Equals ``log m(x_{S + x}) - log m(x_S)``; with ``size = 0`` it is the prior
    predictive ``log m(x)``.
    """
    prec = 1.0 / params.prior_var + size / params.obs_var
    mean = (params.prior_mean / params.prior_var + total / params.obs_var) / prec
    var = params.obs_var + 1.0 / prec
    return -0.5 * (LOG_2PI + np.log(var)) - 0.5 * (x - mean) ** 2 / var


class SubsetTable:
    """``log m`` factors for every subset of a small dataset, indexed by bitmask.

    ``factor[mask]`` is :func:`log_cluster_factor` of the subset; index 0 is
    the empty set and holds 0. ``base`` is the log base density of the whole
    dataset, which every partition shares, so that
    ``log prod_b m(x_{A_b}) = base + sum_b factor[mask_b]``.
    """

    def __init__(self, xs: Sequence[float], params: ModelParams = STANDARD):
        xs = np.asarray(xs, dtype=float)
        n = xs.size
        if n > 24:
            raise ContractError("subset tables are limited to n <= 24")
        sizes = np.zeros(1, dtype=np.int64)
        sums = np.zeros(1)
        for j in range(n):
            sizes = np.concatenate([sizes, sizes + 1])
            sums = np.concatenate([sums, sums + (xs[j] - params.prior_mean)])
        self.xs = xs
        self.params = params
        self.sizes = sizes
        self.sums = sums
        self.factor = log_cluster_factor(sizes, sums, params)
        self.factor[0] = 0.0
        self.base = log_base_density(xs, params)

    def log_marginal(self, mask: int) -> float:
        """Full ``log m`` of the subset ``mask``."""
        idx = [j for j in range(self.xs.size) if mask >> j & 1]
        return float(log_base_density(self.xs[idx], self.params) + self.factor[mask])
