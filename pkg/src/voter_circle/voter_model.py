"""Votes on a circle and the optimal partisan gerrymander over contiguous districts.

``k*n`` voters sit on a circle and each casts +1 or -1 with probability 1/2.
A permissible partition cuts the circle into ``k`` contiguous arcs of exactly
``n`` voters, so it is fixed by a rotation offset ``r`` in ``[0, n)``.

Random streams come from numpy's PCG64 bit generator. A 64-bit seed is fed to
``PCG64`` directly, and each vote is one bit of ``Generator.bytes`` output
(bit set -> +1). Per-trial seeds for simulations are derived by
``trial_seed(master, index)`` through ``SeedSequence``, so results do not
depend on how trials are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_VOTERS = 1 << 26
MAX_ENUMERATION = 24


@dataclass(frozen=True)
class VoteSequence:
    votes: np.ndarray
    k: int
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError(f"k and n must be positive, got k={self.k}, n={self.n}")
        votes = np.asarray(self.votes, dtype=np.int8)
        if votes.ndim != 1 or votes.size != self.k * self.n:
            raise ValueError(f"expected {self.k * self.n} votes, got shape {votes.shape}")
        if not np.all((votes == 1) | (votes == -1)):
            raise ValueError("votes must be +1 or -1")
        votes = votes.copy()
        votes.flags.writeable = False
        object.__setattr__(self, "votes", votes)

    @classmethod
    def from_list(cls, votes, k: int) -> "VoteSequence":
        votes = np.asarray(votes, dtype=np.int8)
        if votes.size % k:
            raise ValueError(f"{votes.size} votes cannot form {k} equal districts")
        return cls(votes, k, votes.size // k)

    def __len__(self) -> int:
        return self.votes.size

    @property
    def positives(self) -> int:
        return int(np.count_nonzero(self.votes == 1))

    def rotated(self, shift: int) -> "VoteSequence":
        return VoteSequence(np.roll(self.votes, -shift), self.k, self.n)

    def reversed(self) -> "VoteSequence":
        return VoteSequence(self.votes[::-1], self.k, self.n)


@dataclass(frozen=True)
class CircularPartition:
    offset: int
    k: int
    n: int

    def __post_init__(self):
        if not 0 <= self.offset < self.n:
            raise ValueError(f"offset {self.offset} outside [0, {self.n})")

    def district(self, j: int) -> np.ndarray:
        if not 0 <= j < self.k:
            raise IndexError(j)
        start = self.offset + j * self.n
        return np.arange(start, start + self.n) % (self.k * self.n)

    def districts(self) -> list[np.ndarray]:
        return [self.district(j) for j in range(self.k)]


@dataclass(frozen=True)
class GerrymanderResult:
    d: int
    best_offset: int
    per_offset_counts: np.ndarray = field(repr=False)

    @property
    def partition_count(self) -> int:
        return self.per_offset_counts.size


def trial_seed(master_seed: int, index: int) -> int:
    """64-bit seed for trial ``index`` of a run seeded with ``master_seed``."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def vote_bits(size: int, seed: int) -> np.ndarray:
    """``size`` votes as an int8 array of +/-1 drawn from one PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))
    bits = np.unpackbits(np.frombuffer(rng.bytes((size + 7) // 8), dtype=np.uint8))[:size]
    return (2 * bits.astype(np.int8) - 1).astype(np.int8)


def generate_votes(k: int, n: int, seed: int, max_voters: int = MAX_VOTERS) -> VoteSequence:
    if k < 1 or n < 1:
        raise ValueError(f"k and n must be positive, got k={k}, n={n}")
    if k * n > max_voters:
        raise ValueError(f"k*n = {k * n} exceeds the limit of {max_voters} voters")
    return VoteSequence(vote_bits(k * n, seed), k, n)


class _PrefixSums:
    """Circular prefix sums giving O(1) arc sums."""

    def __init__(self, votes: np.ndarray):
        self.size = votes.size
        doubled = np.concatenate([votes, votes]).astype(np.int64)
        self.prefix = np.concatenate([[0], np.cumsum(doubled)])

    def arc(self, start: int, length: int) -> int:
        return int(self.prefix[start + length] - self.prefix[start])


def district_sum(v: VoteSequence, start: int, length: int) -> int:
    """Sum of the votes at ``start, ..., start+length-1`` taken modulo ``k*n``."""
    size = len(v)
    if not 0 <= start < size:
        raise ValueError(f"start {start} outside [0, {size})")
    if not 1 <= length <= size:
        raise ValueError(f"length {length} outside [1, {size}]")
    return _PrefixSums(v.votes).arc(start, length)


def window_sums(votes: np.ndarray, n: int) -> np.ndarray:
    """Sums over every circular window of length ``n``.

    Works on a 1-D sequence or on a batch of sequences stacked along axis 0;
    entry ``[..., i]`` is the sum of positions ``i, ..., i+n-1``.
    """
    votes = np.asarray(votes)
    size = votes.shape[-1]
    ext = np.concatenate([votes, votes[..., :n]], axis=-1).astype(np.int32)
    csum = np.cumsum(ext, axis=-1, dtype=np.int32)
    zero = np.zeros(votes.shape[:-1] + (1,), dtype=np.int32)
    csum = np.concatenate([zero, csum], axis=-1)
    return csum[..., n : n + size] - csum[..., :size]


def offset_counts(votes: np.ndarray, k: int, n: int) -> np.ndarray:
    """Number of majority-positive districts for each offset ``r`` in ``[0, n)``.

    District ``j`` at offset ``r`` is the window starting at ``r + j*n``, so the
    ``k*n`` window sums reshaped to ``(k, n)`` hold offset ``r`` in column ``r``.
    """
    w = window_sums(votes, n)
    w = w.reshape(w.shape[:-1] + (k, n))
    return np.count_nonzero(w > 0, axis=-2)


def optimal_gerrymander(v: VoteSequence) -> GerrymanderResult:
    counts = offset_counts(v.votes, v.k, v.n)
    best = int(np.argmax(counts))
    return GerrymanderResult(int(counts[best]), best, counts)


def batch_max_districts(votes: np.ndarray, k: int, n: int) -> np.ndarray:
    """Optimal ``d`` for each row of a ``(trials, k*n)`` vote matrix."""
    return offset_counts(votes, k, n).max(axis=-1)


def naive_optimal_d(votes, k: int, n: int) -> int:
    """Loop-only reference: recompute every district sum for every offset."""
    size = k * n
    best = 0
    for r in range(n):
        count = 0
        for j in range(k):
            s = 0
            for t in range(n):
                s += int(votes[(r + j * n + t) % size])
            if s > 0:
                count += 1
        best = max(best, count)
    return best


def enumerate_d_distribution(k: int, n: int, chunk: int = 1 << 18) -> list[Fraction]:
    """Exact ``Pr(D = d)`` for ``d = 0..k`` by visiting all ``2**(k*n)`` vote patterns."""
    size = k * n
    if k < 1 or n < 1:
        raise ValueError(f"k and n must be positive, got k={k}, n={n}")
    if size > MAX_ENUMERATION:
        raise ValueError(f"k*n = {size} exceeds the enumeration limit {MAX_ENUMERATION}")
    total = 1 << size
    tally = np.zeros(k + 1, dtype=np.int64)
    shifts = np.arange(size, dtype=np.uint32)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.uint32)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.int8)
        d = batch_max_districts(2 * bits - 1, k, n)
        tally += np.bincount(d, minlength=k + 1)
    return [Fraction(int(c), total) for c in tally]


def arc_partitions(size: int, k: int):
    """Every way to cut a circle of ``size`` positions into ``k`` non-empty arcs.

    Yields sorted tuples of cut positions; arc ``j`` runs from cut ``j`` up to
    (but excluding) cut ``j+1``, wrapping around.
    """
    from itertools import combinations

    yield from combinations(range(size), k)


def equal_arc_cuts(size: int, k: int) -> list[tuple[int, ...]]:
    """Cut sets among :func:`arc_partitions` whose arcs all have ``size // k`` voters."""
    n, rem = divmod(size, k)
    if rem:
        return []
    found = []
    for cuts in arc_partitions(size, k):
        lengths = [(cuts[(j + 1) % k] - cuts[j]) % size or size for j in range(k)]
        if all(length == n for length in lengths):
            found.append(cuts)
    return found
