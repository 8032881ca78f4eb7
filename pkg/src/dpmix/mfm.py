"""Mixture of finite mixtures (MFM): a prior on the number of components.

Model: ``s ~ p(s)`` on ``1..s_max``, mixing weights ``pi ~ Dirichlet(gamma, ...,
gamma)`` given ``s``, component means i.i.d. ``N(prior_mean, prior_var)`` and
``x_j`` i.i.d. from the resulting mixture. Integrating out ``pi`` gives a
Dirichlet-multinomial over assignment vectors ``z``, and integrating out the
means gives ``prod_i m(x_{z = i})`` over occupied components.

Two exact paths compute ``p(s | x)``: brute force over every assignment
vector, and a sum over set partitions where a ``t``-block partition stands
for ``s! / (s - t)!`` assignment vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .distribution import PosteriorOverT
from .errors import ConfigError, ContractError, ResourceLimitError
from .marginal import STANDARD, ModelParams, SubsetTable
from .partitions import DEFAULT_ENUMERATION_CAP, iter_partition_tables

DEFAULT_ASSIGNMENT_CAP = 10 ** 7


@dataclass(frozen=True)
class MfmConfig:
    """Truncated prior on ``s`` plus the symmetric Dirichlet parameter.

    ``pmf_s[s - 1]`` is the (renormalized) prior mass of ``s`` components.
    """

    pmf_s: tuple
    gamma: float = 1.0

    def __post_init__(self):
        pmf = np.asarray(self.pmf_s, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise ConfigError("pmf_s must be a nonempty 1-d sequence")
        if not np.all(pmf > 0):
            raise ConfigError("pmf_s entries must be strictly positive")
        if not self.gamma > 0:
            raise ConfigError(f"Dirichlet parameter must be positive, got {self.gamma}")
        object.__setattr__(self, "pmf_s", tuple((pmf / pmf.sum()).tolist()))

    @property
    def s_max(self) -> int:
        return len(self.pmf_s)

    @classmethod
    def geometric(cls, s_max: int, gamma: float = 1.0) -> "MfmConfig":
        """``p(s)`` proportional to ``2**-s``, truncated at ``s_max``."""
        return cls(tuple(2.0 ** -np.arange(1, s_max + 1)), gamma)

    @classmethod
    def uniform(cls, s_max: int, gamma: float = 1.0) -> "MfmConfig":
        return cls(tuple(np.ones(s_max)), gamma)

    @classmethod
    def parse(cls, text: str, s_max: int, gamma: float = 1.0) -> "MfmConfig":
        """Parse ``geometric``, ``uniform`` or explicit comma-separated weights."""
        text = text.strip()
        if text == "geometric":
            return cls.geometric(s_max, gamma)
        if text == "uniform":
            return cls.uniform(s_max, gamma)
        try:
            weights = [float(v) for v in text.split(",")]
        except ValueError:
            raise ConfigError(f"cannot parse prior on s: {text!r}") from None
        if len(weights) != s_max:
            raise ConfigError(f"prior on s lists {len(weights)} weights but s_max={s_max}")
        return cls(tuple(weights), gamma)


def _log_dm_norm(s: int, gamma: float, n: int) -> float:
    return float(gammaln(s * gamma) - gammaln(s * gamma + n))


def _finish(cfg: MfmConfig, log_lik: np.ndarray) -> PosteriorOverT:
    return PosteriorOverT(np.log(np.asarray(cfg.pmf_s)) + log_lik)


def _as_data(xs):
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ContractError("data must be nonempty")
    return xs


def mfm_posterior_s_assignments(xs: Sequence[float], cfg: MfmConfig,
                                params: ModelParams = STANDARD,
                                cap: int = DEFAULT_ASSIGNMENT_CAP,
                                chunk: int = 1 << 18) -> PosteriorOverT:
    """``p(s | x)`` by summing over all ``s**n`` assignment vectors per ``s``.

    Returns a :class:`PosteriorOverT` indexed by ``s = 1..s_max``.
    """
    xs = _as_data(xs)
    n = xs.size
    if cfg.s_max ** n > cap:
        raise ResourceLimitError(
            f"s_max**n = {cfg.s_max}**{n} assignment vectors exceeds the cap of {cap}")
    subsets = SubsetTable(xs, params)
    bit = (1 << np.arange(n)).astype(np.int64)
    log_lik = np.empty(cfg.s_max)
    g = cfg.gamma
    for s in range(1, cfg.s_max + 1):
        total = s ** n
        place = s ** np.arange(n, dtype=np.int64)
        acc = -np.inf
        for lo in range(0, total, chunk):
            codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
            z = (codes[:, None] // place) % s
            w = np.zeros(len(codes))
            for i in range(s):
                member = z == i
                masks = (member * bit).sum(axis=1)
                counts = member.sum(axis=1)
                w += gammaln(g + counts) - gammaln(g) + subsets.factor[masks]
            acc = np.logaddexp(acc, logsumexp(w))
        log_lik[s - 1] = acc + _log_dm_norm(s, g, n) + subsets.base
    return _finish(cfg, log_lik)


def mfm_posterior_s_partitions(xs: Sequence[float], cfg: MfmConfig,
                               params: ModelParams = STANDARD,
                               cap: int = DEFAULT_ENUMERATION_CAP) -> PosteriorOverT:
    """``p(s | x)`` by summing over set partitions with ``s! / (s - t)!`` labelings."""
    xs = _as_data(xs)
    n = xs.size
    subsets = SubsetTable(xs, params)
    g = cfg.gamma
    lg_size = gammaln(g + subsets.sizes) - gammaln(g)
    log_lik = np.full(cfg.s_max, -np.inf)
    for table in iter_partition_tables(n, cap):
        w = np.zeros(len(table))
        for b in range(n):
            mask = table.masks[:, b]
            w += subsets.factor[mask] + lg_size[mask]
        for s in range(1, cfg.s_max + 1):
            ok = table.t <= s
            if not ok.any():
                continue
            t = table.t[ok]
            labelings = gammaln(s + 1) - gammaln(s - t + 1)
            log_lik[s - 1] = np.logaddexp(log_lik[s - 1], logsumexp(w[ok] + labelings))
    for s in range(1, cfg.s_max + 1):
        log_lik[s - 1] += _log_dm_norm(s, g, n) + subsets.base
    return _finish(cfg, log_lik)
