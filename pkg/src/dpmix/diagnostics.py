"""Computable consequences of the inconsistency argument.

All checks are for the standard normal DPM with ``alpha = 1`` and compare
in log space, since the ``R_t`` statistics overflow in linear space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb, logsumexp

from .errors import ContractError
from .exact import exact_joint_over_t, r_statistic
from .gibbs import batch_means_se
from .marginal import ClusterStat, log_h, log_p0
from .partitions import DEFAULT_ENUMERATION_CAP, Partition

DEFAULT_USTAT_BUDGET = 100_000
# lower bound on p(x, T=2) / p(x, T=1) at xbar = 0
RATIO_CONSTANT = 1.0 / (2.0 * math.sqrt(2.0))
# limiting upper bound on p(T=1 | x) when xbar -> 0
P1_CEILING = 1.0 / (1.0 + RATIO_CONSTANT)


@dataclass(frozen=True)
class SplitReport:
    lhs_log: float
    rhs_log: float

    @property
    def slack(self) -> float:
        return self.rhs_log - self.lhs_log


@dataclass(frozen=True)
class UStatReport:
    k: int
    value: float
    exact: bool
    log_value: float
    n_subsets: int
    std_error: float = 0.0


def _require_alpha_one(alpha):
    if alpha != 1:
        raise ContractError("the bound chain is only stated for alpha = 1")


def _split_labels(split, n: int) -> np.ndarray:
    if isinstance(split, Partition):
        if split.n != n:
            raise ContractError(f"split covers {split.n} items but data has {n}")
        labels = split.labels()
    else:
        labels = np.asarray(split)
        if labels.shape != (n,):
            raise ContractError(f"split labels must have length {n}")
    if len(np.unique(labels)) != 2:
        raise ContractError("split must have exactly two nonempty blocks")
    return (labels != labels[0]).astype(np.int64)


def _split_parts(xs, in_second):
    n = xs.size
    a2 = in_second.sum(axis=-1)
    s2 = (xs * in_second).sum(axis=-1)
    total = xs.sum()
    a1 = n - a2
    s1 = total - s2
    lhs = (-0.5 * np.log(n + 1) + 0.5 * total ** 2 / (n + 1)
           + 0.5 * np.log(a1 + 1) - 0.5 * s1 ** 2 / (a1 + 1)
           + 0.5 * np.log(a2 + 1) - 0.5 * s2 ** 2 / (a2 + 1))
    rhs = (0.5 * np.log(a1 + 1) + 0.5 * np.log(a2 + 1) - 0.5 * np.log(n + 1)
           + 0.5 * (total / n) ** 2)
    return lhs, rhs


def check_split_inequality(xs: Sequence[float], split) -> SplitReport:
    """Compare ``m(x) / (m(x_A1) m(x_A2))`` with its upper bound
    ``sqrt((a1 + 1)(a2 + 1) / (n + 1)) * exp(xbar**2 / 2)``.

    ``split`` is a two-block :class:`Partition` or a length-``n`` label
    vector with two distinct labels. The ``p0`` factors cancel, so both sides
    depend only on block sizes and sums.
    """
    xs = np.asarray(xs, dtype=float)
    in_second = _split_labels(split, xs.size)
    lhs, rhs = _split_parts(xs, in_second)
    return SplitReport(float(lhs), float(rhs))


def all_split_slacks(xs: Sequence[float], max_n: int = 20) -> np.ndarray:
    """Slack of the split inequality for every two-block partition of ``xs``."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if n < 2:
        raise ContractError("splits need at least two points")
    if n > max_n:
        raise ContractError(f"exhaustive splits limited to n <= {max_n}")
    # item 0 always sits in the first block; codes enumerate the rest
    codes = np.arange(1, 2 ** (n - 1), dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1)) & 1
    in_second = np.concatenate([np.zeros((len(codes), 1), dtype=np.int64), bits], axis=1)
    lhs, rhs = _split_parts(xs, in_second)
    return rhs - lhs


def proposition_ratio_bound(xs: Sequence[float], alpha: float = 1.0,
                            cap: int = DEFAULT_ENUMERATION_CAP):
    """Return ``(ratio_log, bound_log)``.

    ``ratio_log`` is the exact ``log p(x, T=2) / p(x, T=1)``; ``bound_log`` is
    ``log(1 / (2 sqrt 2)) - xbar**2 / 2``. The first is never below the second.
    """
    _require_alpha_one(alpha)
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise ContractError("the ratio needs n >= 2 (no two-block partition of one point)")
    joint = exact_joint_over_t(xs, alpha, cap=cap)
    ratio_log = float(joint.log_joint[1] - joint.log_joint[0])
    return ratio_log, ratio_bound_log(xs)


def ratio_bound_log(xs) -> float:
    xs = np.asarray(xs, dtype=float)
    return float(math.log(RATIO_CONSTANT) - 0.5 * xs.mean() ** 2)


def p1_upper_bound(xs) -> float:
    """Finite-n ceiling ``1 / (1 + exp(ratio_bound_log))`` on ``p(T=1 | x)``."""
    return 1.0 / (1.0 + math.exp(ratio_bound_log(xs)))


def _sample_subsets(n, k, size, rng):
    if k * 4 > n:
        step = max(1, 5_000_000 // n)
        return np.concatenate([
            np.argpartition(rng.random((min(step, size - i), n)), k - 1, axis=1)[:, :k]
            for i in range(0, size, step)])
    idx = rng.integers(0, n, size=(size, k))
    while True:
        s = np.sort(idx, axis=1)
        bad = (np.diff(s, axis=1) == 0).any(axis=1)
        if not bad.any():
            return idx
        idx[bad] = rng.integers(0, n, size=(int(bad.sum()), k))


def u_statistic(xs: Sequence[float], k: int, budget: Optional[int] = DEFAULT_USTAT_BUDGET,
                rng: np.random.Generator = None) -> UStatReport:
    """Average of ``h(x_S)`` over size-``k`` subsets.

    Uses all ``C(n, k)`` subsets when that count is within ``budget`` (or
    ``budget`` is None); otherwise averages ``budget`` uniformly drawn
    subsets and reports a batch-means standard error.
    """
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if not 1 <= k <= n:
        raise ContractError(f"k must be in 1..{n}, got {k}")
    total = comb(n, k, exact=True)
    if budget is None or total <= budget:
        if k == n:
            sums = np.array([xs.sum()])
        else:
            idx = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
            sums = xs[idx].sum(axis=1)
        logs = -0.5 * np.log(k + 1) + 0.5 * sums ** 2 / (k + 1)
        log_value = float(logsumexp(logs) - np.log(len(logs)))
        return UStatReport(k, math.exp(log_value), True, log_value, total)
    if rng is None:
        raise ContractError("sampled U-statistics need a generator")
    idx = _sample_subsets(n, k, budget, rng)
    vals = np.exp(-0.5 * np.log(k + 1) + 0.5 * xs[idx].sum(axis=1) ** 2 / (k + 1))
    value = float(vals.mean())
    se = float(batch_means_se(vals[None, :, None])[0])
    return UStatReport(k, value, False, math.log(value), budget, se)


def r2_lower_bound(xs: Sequence[float], K: int, alpha: float = 1.0,
                   budget: Optional[int] = None, rng: np.random.Generator = None) -> float:
    """``log sum_{k=1}^K n / (2 k (n - k)) * U_k``, a lower bound on ``log R_2``."""
    _require_alpha_one(alpha)
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if not 1 <= K <= n - 1:
        raise ContractError(f"K must be in 1..{n - 1}, got {K}")
    terms = [math.log(n / (2.0 * k * (n - k))) + u_statistic(xs, k, budget, rng).log_value
             for k in range(1, K + 1)]
    return float(logsumexp(terms))


def log_r1_closed_form(xs: Sequence[float]) -> float:
    """``log R_1 = 0.5 log(n / (n + 1)) + 0.5 (n / (n + 1)) Z_n**2``."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    z = xs.sum() / math.sqrt(n)
    return float(0.5 * math.log(n / (n + 1)) + 0.5 * n / (n + 1) * z * z)


def r1_bound_log(xs: Sequence[float]) -> float:
    """``Z_n**2 / 2`` with ``Z_n = sum(x) / sqrt(n)``."""
    xs = np.asarray(xs, dtype=float)
    z = xs.sum() / math.sqrt(xs.size)
    return float(0.5 * z * z)


def r_statistics(xs, alpha: float = 1.0, cap: int = DEFAULT_ENUMERATION_CAP):
    """Exact ``(log R_1, log R_2)`` from a single enumeration."""
    _require_alpha_one(alpha)
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    joint = exact_joint_over_t(xs, alpha, cap=cap)
    shift = 1.5 * math.log(n) - log_p0(xs)
    r2 = joint.log_joint[1] + shift if n >= 2 else -np.inf
    return float(joint.log_joint[0] + shift), float(r2)


def harmonic_number(K: int) -> float:
    if K < 1:
        raise ContractError(f"K must be >= 1, got {K}")
    return math.fsum(1.0 / k for k in range(1, K + 1))


__all__ = [
    "SplitReport", "UStatReport", "check_split_inequality", "all_split_slacks",
    "proposition_ratio_bound", "ratio_bound_log", "p1_upper_bound", "u_statistic",
    "r2_lower_bound", "log_r1_closed_form", "r1_bound_log", "r_statistics",
    "r_statistic", "harmonic_number", "log_h", "ClusterStat", "P1_CEILING", "RATIO_CONSTANT",
]
