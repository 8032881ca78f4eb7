"""Collapsed Gibbs sampler over cluster assignments.

Component means are integrated out, so a state is just the assignment
vector plus per-cluster (size, sum). Item ``j`` moves to an existing cluster
``c`` with weight ``|c| * m(x_c + x_j) / m(x_c)`` and to a new cluster with
weight ``alpha * m(x_j)``; both ratios are posterior predictive densities.
Scans are systematic (j = 0..n-1). The inner loop is compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Sequence

import numba
import numpy as np

from .distribution import PosteriorOverT
from .errors import ConfigError, ContractError
from .marginal import STANDARD, ClusterStat, ModelParams
from .partitions import Partition, sample_crp_labels

INIT_MODES = ("all-in-one", "all-singletons", "prior-draw")
MIN_BATCHES = 20
# full recomputation of cluster sums happens at least this often
RECOMPUTE_EVERY = 1000
DRIFT_TOL = 1e-9


class DriftError(RuntimeError):
    """Incrementally tracked cluster sums drifted from their exact values."""


@dataclass(frozen=True)
class ChainConfig:
    n_sweeps: int = 50_000
    burn_in: int = 10_000
    thin: int = 10
    seed: int = 0
    n_chains: int = 3
    init: str = "prior-draw"

    def __post_init__(self):
        if self.n_sweeps < 1 or self.thin < 1 or self.n_chains < 1:
            raise ConfigError("n_sweeps, thin and n_chains must be positive")
        if not 0 <= self.burn_in < self.n_sweeps:
            raise ConfigError(
                f"burn_in must satisfy 0 <= burn_in < n_sweeps, got {self.burn_in}, {self.n_sweeps}")
        if self.init not in INIT_MODES:
            raise ConfigError(f"unknown init mode {self.init!r}; choose from {INIT_MODES}")

    @property
    def n_kept(self) -> int:
        return len(range(self.burn_in, self.n_sweeps, self.thin))


@dataclass
class GibbsState:
    """Assignments plus per-cluster sufficient statistics.

    ``sizes`` and ``sums`` are indexed by label and have capacity ``n``;
    ``active[:n_clusters]`` lists the labels currently in use and ``pos``
    is its inverse.
    """

    assignments: np.ndarray
    sizes: np.ndarray
    sums: np.ndarray
    active: np.ndarray
    pos: np.ndarray
    n_clusters: int

    @classmethod
    def from_labels(cls, labels, xs) -> "GibbsState":
        labels = np.asarray(labels)
        xs = np.asarray(xs, dtype=float)
        n = len(labels)
        # relabel to 0..t-1 in order of first appearance
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(first)
        remap = np.empty_like(order)
        remap[order] = np.arange(len(order))
        assign = remap[inv.ravel()].astype(np.int64)
        t = len(order)
        sizes = np.zeros(n, dtype=np.int64)
        sums = np.zeros(n)
        np.add.at(sizes, assign, 1)
        np.add.at(sums, assign, xs)
        active = np.arange(n, dtype=np.int64)
        pos = np.arange(n, dtype=np.int64)
        return cls(assign, sizes, sums, active, pos, t)

    @property
    def clusters(self) -> Dict[int, ClusterStat]:
        return {int(c): ClusterStat(int(self.sizes[c]), float(self.sums[c]))
                for c in self.active[: self.n_clusters]}

    def partition(self) -> Partition:
        return Partition.from_labels(self.assignments)

    def check(self, xs, tol: float = DRIFT_TOL) -> float:
        """Verify the invariants; return the largest drift in cluster sums."""
        xs = np.asarray(xs, dtype=float)
        n = len(self.assignments)
        labels = self.active[: self.n_clusters]
        if set(np.unique(self.assignments)) != set(labels.tolist()):
            raise ContractError("assignment labels and active clusters disagree")
        if self.sizes[labels].min() < 1 or self.sizes[labels].sum() != n:
            raise ContractError("cluster sizes must be positive and sum to n")
        counts = np.bincount(self.assignments, minlength=n)
        if not np.array_equal(counts[labels], self.sizes[labels]):
            raise ContractError("cluster sizes do not match assignments")
        exact = np.bincount(self.assignments, weights=xs, minlength=n)
        drift = float(np.abs(exact[labels] - self.sums[labels]).max())
        if drift > tol:
            raise DriftError(f"cluster sums drifted by {drift:.3e} (tolerance {tol:.0e})")
        return drift

    def resync(self, xs) -> float:
        """Recompute sums from scratch after checking drift."""
        drift = self.check(xs)
        self.sums[:] = np.bincount(self.assignments, weights=np.asarray(xs, float),
                                   minlength=len(self.assignments))
        return drift

    def copy(self) -> "GibbsState":
        return GibbsState(self.assignments.copy(), self.sizes.copy(), self.sums.copy(),
                          self.active.copy(), self.pos.copy(), self.n_clusters)


def init_state(xs: Sequence[float], mode: str = "prior-draw", rng: np.random.Generator = None,
               alpha: float = 1.0) -> GibbsState:
    """Starting state: one cluster, all singletons, or a draw from the CRP prior."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if n == 0:
        raise ContractError("data must be nonempty")
    if mode == "all-in-one":
        labels = np.zeros(n, dtype=np.int64)
    elif mode == "all-singletons":
        labels = np.arange(n)
    elif mode == "prior-draw":
        if rng is None:
            raise ContractError("prior-draw initialization needs a generator")
        labels = sample_crp_labels(n, alpha, 1, rng)[0]
    else:
        raise ConfigError(f"unknown init mode {mode!r}; choose from {INIT_MODES}")
    return GibbsState.from_labels(labels, xs)


@numba.njit(cache=True, nogil=True)
def _log_pred(x, size, total, mu0, tau2, sigma2):
    prec = 1.0 / tau2 + size / sigma2
    mean = (mu0 / tau2 + total / sigma2) / prec
    var = sigma2 + 1.0 / prec
    d = x - mean
    return -0.5 * (np.log(2.0 * np.pi * var) + d * d / var)


@numba.njit(cache=True, nogil=True)
def _sweeps(xs, assign, sizes, sums, active, pos, n_clusters, alpha, mu0, tau2, sigma2,
            uniforms, t_trace, label_trace):
    n = xs.shape[0]
    logw = np.empty(n + 1)
    log_alpha = np.log(alpha)
    t = n_clusters
    for s in range(uniforms.shape[0]):
        for j in range(n):
            x = xs[j]
            c = assign[j]
            sizes[c] -= 1
            sums[c] -= x
            if sizes[c] == 0:
                sums[c] = 0.0
                # swap c out of the active list
                p = pos[c]
                last = active[t - 1]
                active[p] = last
                pos[last] = p
                active[t - 1] = c
                pos[c] = t - 1
                t -= 1
            mx = -np.inf
            for k in range(t):
                lab = active[k]
                w = np.log(sizes[lab]) + _log_pred(x, sizes[lab], sums[lab], mu0, tau2, sigma2)
                logw[k] = w
                if w > mx:
                    mx = w
            w = log_alpha + _log_pred(x, 0.0, 0.0, mu0, tau2, sigma2)
            logw[t] = w
            if w > mx:
                mx = w
            total = 0.0
            for k in range(t + 1):
                logw[k] = np.exp(logw[k] - mx)
                total += logw[k]
            u = uniforms[s, j] * total
            k = 0
            acc = logw[0]
            while acc <= u and k < t:
                k += 1
                acc += logw[k]
            if k == t:
                # open a new cluster with the first free label
                lab = active[t]
                t += 1
            else:
                lab = active[k]
            assign[j] = lab
            sizes[lab] += 1
            sums[lab] += x
        t_trace[s] = t
        if label_trace.shape[0] > 0:
            label_trace[s, :] = assign
    return t


def gibbs_sweep(state: GibbsState, xs, alpha: float, rng: np.random.Generator,
                params: ModelParams = STANDARD) -> GibbsState:
    """One systematic-scan pass; updates ``state`` in place and returns it."""
    xs = np.ascontiguousarray(xs, dtype=float)
    u = rng.random((1, xs.size))
    t_trace = np.zeros(1, dtype=np.int64)
    state.n_clusters = _sweeps(xs, state.assignments, state.sizes, state.sums, state.active,
                               state.pos, state.n_clusters, float(alpha), params.prior_mean,
                               params.prior_var, params.obs_var, u, t_trace,
                               np.zeros((0, 0), dtype=np.int64))
    return state


def run_chain(xs, alpha: float, n_sweeps: int, rng: np.random.Generator,
              state: GibbsState = None, params: ModelParams = STANDARD,
              record_labels: bool = False, block: int = 256):
    """Run ``n_sweeps`` sweeps; return ``(t_trace, label_trace, final_state)``.

    ``t_trace[s]`` is the number of clusters after sweep ``s``. Cluster sums
    are checked and recomputed from scratch at least every
    ``RECOMPUTE_EVERY`` sweeps; drift beyond ``DRIFT_TOL`` raises
    :class:`DriftError`.
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    n = xs.size
    if state is None:
        state = init_state(xs, "prior-draw", rng, alpha)
    t_trace = np.zeros(n_sweeps, dtype=np.int64)
    labels = np.zeros((n_sweeps if record_labels else 0, n), dtype=np.int64)
    block = max(1, min(block, RECOMPUTE_EVERY, 1_000_000 // max(n, 1) or 1))
    done = since_sync = 0
    while done < n_sweeps:
        m = min(block, n_sweeps - done)
        u = rng.random((m, n))
        lab_view = labels[done:done + m] if record_labels else labels
        state.n_clusters = _sweeps(xs, state.assignments, state.sizes, state.sums, state.active,
                                   state.pos, state.n_clusters, float(alpha), params.prior_mean,
                                   params.prior_var, params.obs_var, u, t_trace[done:done + m],
                                   lab_view)
        done += m
        since_sync += m
        if since_sync + block > RECOMPUTE_EVERY or done == n_sweeps:
            state.resync(xs)
            since_sync = 0
    return t_trace, (labels if record_labels else None), state


def batch_means_se(series: np.ndarray, min_batches: int = MIN_BATCHES) -> np.ndarray:
    """Batch-means standard error of the mean for each column of ``series``.

    ``series`` has shape ``(chains, samples, k)``. Batch size is
    ``floor(sqrt(samples))`` unless that leaves fewer than ``min_batches``
    batches per chain. Batch means from all chains are pooled.
    """
    chains, length, _ = series.shape
    b = int(np.sqrt(length))
    if b == 0 or length // b < min_batches:
        b = length // min_batches
    if b < 1:
        raise ConfigError(
            f"{length} retained samples per chain cannot form {min_batches} batches")
    a = length // b
    trimmed = series[:, length - a * b:, :]
    means = trimmed.reshape(chains, a, b, -1).mean(axis=2).reshape(chains * a, -1)
    return means.std(axis=0, ddof=1) / np.sqrt(chains * a)


def _chain_streams(seed: int, n_chains: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_chains)]


def estimate_posterior_t(xs, alpha: float = 1.0, cfg: ChainConfig = ChainConfig(),
                         params: ModelParams = STANDARD,
                         seed_seq: np.random.SeedSequence = None) -> PosteriorOverT:
    """Estimate ``p(T_n = t | x)`` from ``cfg.n_chains`` merged chains.

    Returns a :class:`PosteriorOverT` whose ``std_errors`` are batch-means
    standard errors. Raises :class:`ConfigError` when the retained samples
    cannot form at least 20 batches per chain.
    """
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if n == 0:
        raise ContractError("data must be nonempty")
    kept = cfg.n_kept
    if kept < MIN_BATCHES:
        raise ConfigError(
            f"n_sweeps={cfg.n_sweeps}, burn_in={cfg.burn_in}, thin={cfg.thin} keep only "
            f"{kept} samples; at least {MIN_BATCHES} are needed for batch means")
    if seed_seq is None:
        seed_seq = np.random.SeedSequence(cfg.seed)
    rngs = [np.random.default_rng(s) for s in seed_seq.spawn(cfg.n_chains)]
    traces = []
    for rng in rngs:
        state = init_state(xs, cfg.init, rng, alpha)
        t_trace, _, _ = run_chain(xs, alpha, cfg.n_sweeps, rng, state, params)
        traces.append(t_trace[cfg.burn_in::cfg.thin])
    traces = np.stack(traces)
    width = int(traces.max())
    onehot = np.zeros(traces.shape + (width,))
    np.put_along_axis(onehot, (traces - 1)[..., None], 1.0, axis=2)
    probs = np.zeros(n)
    se = np.zeros(n)
    probs[:width] = onehot.reshape(-1, width).mean(axis=0)
    se[:width] = batch_means_se(onehot)
    return PosteriorOverT.from_probs(probs, se)
