"""Set partitions and the Chinese restaurant process.

Items are indexed ``0, ..., n-1``. A partition is stored unordered, with
blocks sorted by their smallest element; the CRP mass used throughout is the
mass of the unordered partition, ``alpha**t * prod((|A_i| - 1)!) / alpha^(n)``.
Summing the ordered-partition mass over the ``t!`` orderings gives the same
number, so nothing downstream (prior or posterior on ``t``) changes.

Bulk enumeration works on restricted growth strings (RGS): ``labels[j]`` is
the block of item ``j`` and each label is at most one more than the largest
label before it. RGS are generated in lexicographic order, in chunks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .distribution import PosteriorOverT
from .errors import ContractError, ResourceLimitError

DEFAULT_ENUMERATION_CAP = 13

# partition tables up to this size are kept in memory after first use
_CACHE_MAX_N = 12
_CHUNK_ROWS = 1 << 20


@dataclass(frozen=True)
class Partition:
    """A set partition of ``{0, ..., n-1}`` in canonical form."""

    blocks: tuple
    n: int

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        if any(len(b) == 0 for b in blocks):
            raise ContractError("partition blocks must be nonempty")
        items = [i for b in blocks for i in b]
        if sorted(items) != list(range(self.n)):
            raise ContractError(
                f"blocks must be disjoint and cover 0..{self.n - 1}, got {blocks!r}")
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=lambda b: b[0])))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Build the partition induced by a label vector (labels are arbitrary)."""
        groups: dict = {}
        for j, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(j)
        return cls(tuple(groups.values()), len(labels))

    @property
    def t(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    def labels(self) -> np.ndarray:
        """Restricted growth string of the partition."""
        out = np.empty(self.n, dtype=np.int64)
        for k, b in enumerate(self.blocks):
            out[list(b)] = k
        return out

    def __str__(self):
        return "{" + ", ".join("{" + ", ".join(map(str, b)) + "}" for b in self.blocks) + "}"


def _check_cap(n: int, cap: int) -> None:
    if n < 1:
        raise ContractError(f"n must be a positive integer, got {n}")
    if n > cap:
        raise ResourceLimitError(
            f"n={n} exceeds the enumeration cap of {cap}; Bell({n}) partitions would be required")


@lru_cache(maxsize=None)
def _completion_counts(n: int) -> np.ndarray:
    # counts[b, r]: number of ways to extend an RGS that already uses b blocks
    # by r more positions
    counts = np.zeros((n + 2, n + 1), dtype=np.int64)
    counts[:, 0] = 1
    for r in range(1, n + 1):
        for b in range(0, n + 1):
            counts[b, r] = b * counts[b, r - 1] + counts[b + 1, r - 1]
    return counts


def _extend(prefix: np.ndarray, n_blocks: np.ndarray, length: int):
    while prefix.shape[1] < length:
        reps = n_blocks + 1
        parent = np.repeat(np.arange(len(prefix)), reps)
        starts = np.repeat(np.cumsum(reps) - reps, reps)
        digit = (np.arange(len(parent)) - starts).astype(prefix.dtype)
        prefix = np.concatenate([prefix[parent], digit[:, None]], axis=1)
        n_blocks = np.maximum(n_blocks[parent], digit.astype(np.int64) + 1)
    return prefix, n_blocks


def iter_rgs(n: int, chunk_rows: int = _CHUNK_ROWS) -> Iterator[np.ndarray]:
    """Yield all restricted growth strings of length ``n`` in lexicographic order.

    Each chunk is an ``(m, n)`` int8 array; no cap is applied here.
    """
    if n < 1:
        raise ContractError(f"n must be a positive integer, got {n}")
    depth = max(1, n - 7)
    prefix, n_blocks = _extend(np.zeros((1, 1), dtype=np.int8), np.ones(1, dtype=np.int64), depth)
    remaining = _completion_counts(n)[n_blocks, n - depth]
    start = 0
    while start < len(prefix):
        stop = start + 1
        total = remaining[start]
        while stop < len(prefix) and total + remaining[stop] <= chunk_rows:
            total += remaining[stop]
            stop += 1
        rows, _ = _extend(prefix[start:stop], n_blocks[start:stop], n)
        yield rows
        start = stop


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        row = new
    return row[0]


def count_partitions(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Count partitions by running the enumerator (not a formula)."""
    _check_cap(n, cap)
    return sum(len(chunk) for chunk in iter_rgs(n))


def enumerate_partitions(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Partition]:
    """Yield every set partition of ``{0, ..., n-1}`` exactly once.

    Raises
    ------
    ResourceLimitError
        If ``n`` exceeds ``cap``.
    """
    _check_cap(n, cap)
    for chunk in iter_rgs(n):
        for row in chunk:
            yield Partition.from_labels(row)


@dataclass(frozen=True)
class PartitionTable:
    """Vectorized description of a batch of partitions of ``{0, ..., n-1}``.

    ``masks[i, b]`` is the bitmask of block ``b`` in partition ``i`` (0 for
    unused block slots), ``t[i]`` the block count and ``log_fact[i]`` the sum
    of ``log((|A_b| - 1)!)`` over the blocks.
    """

    masks: np.ndarray
    t: np.ndarray
    log_fact: np.ndarray
    n: int

    def __len__(self):
        return len(self.t)


def _table_from_rgs(rgs: np.ndarray) -> PartitionTable:
    m, n = rgs.shape
    dtype = np.uint16 if n <= 16 else np.uint32
    masks = np.zeros((m, n), dtype=dtype)
    sizes = np.zeros((m, n), dtype=np.int64)
    rows = np.arange(m)
    for j in range(n):
        col = rgs[:, j].astype(np.intp)
        masks[rows, col] |= dtype(1 << j)
        sizes[rows, col] += 1
    log_fact = gammaln(np.maximum(sizes, 1)).sum(axis=1)
    t = (rgs.max(axis=1).astype(np.int64) + 1)
    return PartitionTable(masks, t, log_fact, n)


@lru_cache(maxsize=4)
def _cached_table(n: int) -> PartitionTable:
    rgs = np.concatenate(list(iter_rgs(n)))
    return _table_from_rgs(rgs)


def iter_partition_tables(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[PartitionTable]:
    """Yield partition tables covering every partition of ``{0, ..., n-1}``.

    Partitions appear in lexicographic RGS order. Small ``n`` is served from
    a cache as a single table.
    """
    _check_cap(n, cap)
    if n <= _CACHE_MAX_N:
        yield _cached_table(n)
        return
    for rgs in iter_rgs(n):
        yield _table_from_rgs(rgs)


def log_rising_factorial(alpha: float, n: int) -> float:
    """``log(alpha * (alpha + 1) * ... * (alpha + n - 1))``; 0 for ``n = 0``."""
    if alpha <= 0:
        raise ContractError(f"alpha must be positive, got {alpha}")
    if n == 0:
        return 0.0
    return float(gammaln(alpha + n) - gammaln(alpha))


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise ContractError(f"concentration alpha must be positive, got {alpha}")


def crp_log_mass(partition: Partition, alpha: float) -> float:
    """Log CRP mass of an unordered partition."""
    _check_alpha(alpha)
    sizes = np.asarray(partition.sizes)
    return float(partition.t * np.log(alpha) + gammaln(sizes).sum()
                 - log_rising_factorial(alpha, partition.n))


def table_crp_log_mass(table: PartitionTable, alpha: float) -> np.ndarray:
    """Vectorized :func:`crp_log_mass` over a partition table."""
    _check_alpha(alpha)
    return table.t * np.log(alpha) + table.log_fact - log_rising_factorial(alpha, table.n)


def prior_num_clusters(n: int, alpha: float) -> PosteriorOverT:
    """Exact CRP prior on the number of clusters.

    Uses the unsigned Stirling recurrence ``|s(m+1, t)| = m |s(m, t)| +
    |s(m, t-1)|`` carried in normalized form, so ``p_n(t) = alpha**t |s(n, t)| /
    alpha^(n)`` never overflows.
    """
    if n < 1:
        raise ContractError(f"n must be a positive integer, got {n}")
    _check_alpha(alpha)
    p = np.zeros(n + 1)
    p[1] = 1.0
    for m in range(1, n):
        shifted = np.zeros_like(p)
        shifted[1:] = p[:-1]
        p = (m * p + alpha * shifted) / (alpha + m)
    probs = p[1:]
    return PosteriorOverT.from_probs(probs)


def sample_crp_labels(n: int, alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` CRP partitions by sequential seating.

    Returns an ``(size, n)`` array of restricted growth strings.
    """
    if n < 1:
        raise ContractError(f"n must be a positive integer, got {n}")
    _check_alpha(alpha)
    labels = np.zeros((size, n), dtype=np.int64)
    counts = np.zeros((size, n), dtype=np.int64)
    counts[:, 0] = 1
    n_tables = np.ones(size, dtype=np.int64)
    rows = np.arange(size)
    for i in range(1, n):
        width = int(n_tables.max())
        u = rng.random(size) * (i + alpha)
        cum = np.cumsum(counts[:, :width], axis=1)
        choice = (cum <= u[:, None]).sum(axis=1)
        choice = np.minimum(choice, n_tables)
        labels[:, i] = choice
        counts[rows, choice] += 1
        n_tables += choice == n_tables
    return labels


def sample_crp(n: int, alpha: float, rng: np.random.Generator) -> Partition:
    """Draw one partition from the CRP; deterministic given the generator state."""
    return Partition.from_labels(sample_crp_labels(n, alpha, 1, rng)[0])
