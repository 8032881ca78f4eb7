"""Distributions over the number of clusters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp


@dataclass
class PosteriorOverT:
    """Distribution over the number of clusters ``t = 1, ..., n``.

    ``log_joint[t - 1]`` holds an unnormalized log weight for ``t`` clusters
    (for an exact posterior this is ``log p(x, T_n = t)``); ``probs`` is the
    normalized distribution. Monte Carlo estimates also carry ``std_errors``.
    """

    log_joint: np.ndarray
    probs: np.ndarray = field(default=None)
    std_errors: Optional[np.ndarray] = None

    def __post_init__(self):
        self.log_joint = np.asarray(self.log_joint, dtype=float)
        if self.probs is None:
            total = logsumexp(self.log_joint)
            self.probs = np.exp(self.log_joint - total)
        else:
            self.probs = np.asarray(self.probs, dtype=float)

    @classmethod
    def from_probs(cls, probs, std_errors=None) -> "PosteriorOverT":
        probs = np.asarray(probs, dtype=float)
        with np.errstate(divide="ignore"):
            log_joint = np.log(probs)
        return cls(log_joint, probs, None if std_errors is None else np.asarray(std_errors, float))

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def log_evidence(self) -> float:
        """Log of the sum of the unnormalized weights."""
        return float(logsumexp(self.log_joint))

    def p(self, t: int) -> float:
        if not 1 <= t <= self.n:
            return 0.0
        return float(self.probs[t - 1])

    def mode(self) -> int:
        return int(np.argmax(self.probs)) + 1

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.n + 1), self.probs))

    def total_variation(self, other: "PosteriorOverT") -> float:
        m = max(self.n, other.n)
        a = np.zeros(m)
        b = np.zeros(m)
        a[: self.n] = self.probs
        b[: other.n] = other.probs
        return 0.5 * float(np.abs(a - b).sum())
