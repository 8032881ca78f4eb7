"""Exact posterior on the number of clusters by enumerating set partitions."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .distribution import PosteriorOverT
from .errors import ContractError
from .marginal import STANDARD, ModelParams, SubsetTable, log_p0
from .partitions import (
    DEFAULT_ENUMERATION_CAP,
    Partition,
    _check_cap,
    _table_from_rgs,
    enumerate_partitions,
    iter_partition_tables,
    log_rising_factorial,
    sample_crp_labels,
    table_crp_log_mass,
)


def _as_data(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ContractError("data must be nonempty")
    return xs


def _partition_log_weights(table, factor: np.ndarray, alpha: float) -> np.ndarray:
    w = table_crp_log_mass(table, alpha)
    for b in range(table.n):
        w += factor[table.masks[:, b]]
    return w


def _grouped_logsumexp(w: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    idx = t - 1
    mx = np.full(n, -np.inf)
    np.maximum.at(mx, idx, w)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    s = np.bincount(idx, weights=np.exp(w - safe[idx]), minlength=n)
    with np.errstate(divide="ignore"):
        return safe + np.log(s)


def joint_over_t_from_factors(factor: np.ndarray, n: int, alpha: float,
                              cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Per-``t`` log sums of ``CRP mass * exp(sum_b factor[mask_b])``.

    ``factor`` is indexed by subset bitmask with ``factor[0] == 0``. Chunks
    are reduced in a fixed order, so the result is bit-stable.
    """
    acc = np.full(n, -np.inf)
    for table in iter_partition_tables(n, cap):
        w = _partition_log_weights(table, factor, alpha)
        acc = np.logaddexp(acc, _grouped_logsumexp(w, table.t, n))
    return acc


def exact_joint_over_t(xs: Sequence[float], alpha: float = 1.0,
                       params: ModelParams = STANDARD,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> PosteriorOverT:
    """Exact ``log p(x, T_n = t)`` for ``t = 1..n``.

    Sums the CRP mass times ``prod_b m(x_{A_b})`` over every set partition
    with ``t`` blocks. Raises :class:`~dpmix.errors.ResourceLimitError` when
    ``len(xs)`` exceeds ``cap``.
    """
    xs = _as_data(xs)
    _check_cap(xs.size, cap)
    subsets = SubsetTable(xs, params)
    log_joint = joint_over_t_from_factors(subsets.factor, xs.size, alpha, cap) + subsets.base
    return PosteriorOverT(log_joint)


def posterior_over_t(xs: Sequence[float], alpha: float = 1.0,
                     params: ModelParams = STANDARD,
                     cap: int = DEFAULT_ENUMERATION_CAP) -> PosteriorOverT:
    """Exact ``p(T_n = t | x)``; ``probs[t - 1]`` is the posterior of ``t`` clusters."""
    return exact_joint_over_t(xs, alpha, params, cap)


def partition_posterior(xs: Sequence[float], alpha: float = 1.0,
                        params: ModelParams = STANDARD, cap: int = 10):
    """Posterior probability of every partition, in enumeration order.

    Returns a list of ``(Partition, prob)`` pairs. Intended for small ``n``.
    """
    xs = _as_data(xs)
    subsets = SubsetTable(xs, params)
    partitions = list(enumerate_partitions(xs.size, cap))
    w = np.concatenate([_partition_log_weights(tab, subsets.factor, alpha)
                        for tab in iter_partition_tables(xs.size, cap)])
    p = np.exp(w - w.max())
    p /= p.sum()
    return list(zip(partitions, p))


def r_statistic(t: int, xs: Sequence[float], alpha: float = 1.0,
                cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Exact ``log R_t = log(n**1.5 * p(x, T_n = t) / p0(x))``.

    For ``alpha != 1`` the scale factor becomes ``n**1.5 * alpha^(n) / n!``.
    Standard normal DPM only.
    """
    if t not in (1, 2):
        raise ContractError(f"R_t is defined for t in (1, 2), got {t}")
    xs = _as_data(xs)
    n = xs.size
    if t > n:
        return -np.inf
    joint = exact_joint_over_t(xs, alpha, STANDARD, cap)
    scale = 1.5 * np.log(n)
    if alpha != 1.0:
        scale += log_rising_factorial(alpha, n) - gammaln(n + 1)
    return float(scale + joint.log_joint[t - 1] - log_p0(xs))


def importance_evidence(xs: Sequence[float], alpha: float, n_draws: int,
                        rng: np.random.Generator, params: ModelParams = STANDARD,
                        batch: int = 200_000):
    """Prior-sampling estimate of the marginal likelihood ``p(x)``.

    Averages ``prod_b m(x_{A_b})`` over CRP draws. Returns ``(estimate,
    std_error)`` both divided by ``exp(base)`` (the shared base density), so
    they compare directly with ``exp(log_evidence - base)``.
    """
    xs = _as_data(xs)
    subsets = SubsetTable(xs, params)
    vals = []
    left = n_draws
    while left > 0:
        m = min(batch, left)
        labels = sample_crp_labels(xs.size, alpha, m, rng)
        table = _table_from_rgs(labels)
        w = np.zeros(m)
        for b in range(xs.size):
            w += subsets.factor[table.masks[:, b]]
        vals.append(np.exp(w))
        left -= m
    vals = np.concatenate(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))


__all__ = [
    "Partition",
    "exact_joint_over_t",
    "posterior_over_t",
    "partition_posterior",
    "r_statistic",
    "importance_evidence",
    "joint_over_t_from_factors",
]
