"""Simulation of the voter circle and of the two-walk event behind ``D_n = 0``.

Every trial draws its votes from ``generate_votes(k, n, trial_seed(seed, t))``,
so counts are identical for any block size or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exact_analysis import prob_d2_exact
from .limit_constants import CLOSED_FORM
from .voter_model import batch_max_districts, trial_seed, vote_bits

MAX_WORK = 1 << 34
BLOCK = 256


@dataclass(frozen=True)
class DistributionEstimate:
    counts: np.ndarray
    trials: int
    seed: int
    k: int
    n: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.trials

    @property
    def std_errors(self) -> np.ndarray:
        p = self.frequencies
        return np.sqrt(p * (1 - p) / self.trials)

    def frequency(self, d: int) -> float:
        return float(self.counts[d]) / self.trials

    @property
    def mean_d(self) -> float:
        return float(np.dot(np.arange(self.k + 1), self.counts)) / self.trials


@dataclass(frozen=True)
class WalkPath:
    steps: int
    W1: np.ndarray = field(repr=False)
    W2: np.ndarray = field(repr=False)

    @classmethod
    def from_votes(cls, votes: np.ndarray) -> "WalkPath":
        n = votes.size // 2
        A = np.concatenate([[0], np.cumsum(votes[:n], dtype=np.int64)])
        B = np.concatenate([[0], np.cumsum(votes[n:], dtype=np.int64)])
        scale = math.sqrt(n)
        return cls(n, A / scale, -B / scale)

    def at(self, t: float) -> tuple[float, float]:
        i = int(math.floor(self.steps * t))
        return float(self.W1[i]), float(self.W2[i])


def _vote_block(k: int, n: int, seed: int, lo: int, hi: int) -> np.ndarray:
    return np.stack([vote_bits(k * n, trial_seed(seed, t)) for t in range(lo, hi)])


def _count_block(args) -> np.ndarray:
    k, n, seed, lo, hi = args
    d = batch_max_districts(_vote_block(k, n, seed, lo, hi), k, n)
    return np.bincount(d, minlength=k + 1)


def walk_event(votes: np.ndarray) -> np.ndarray:
    """Four-way walk event for each row of a ``(trials, 2n)`` vote matrix.

    Evaluated on the integer walks ``sqrt(n) W1 = A`` and ``sqrt(n) W2 = -B``;
    the positive rescaling does not change any of the comparisons.
    """
    votes = np.atleast_2d(votes)
    n = votes.shape[1] // 2
    zeros = np.zeros((votes.shape[0], 1), dtype=np.int32)
    A = np.concatenate([zeros, np.cumsum(votes[:, :n], axis=1, dtype=np.int32)], axis=1)
    B = np.concatenate([zeros, np.cumsum(votes[:, n:], axis=1, dtype=np.int32)], axis=1)
    total = A - B
    lo, hi = total.min(axis=1), total.max(axis=1)
    return (A[:, -1] <= lo) & (lo <= hi) & (hi <= -B[:, -1])


def _walk_block(args) -> int:
    n, seed, lo, hi = args
    return int(np.count_nonzero(walk_event(_vote_block(2, n, seed, lo, hi))))


def _blocks(trials: int, block: int):
    return [(lo, min(lo + block, trials)) for lo in range(0, trials, block)]


def _run(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) == 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _check_work(trials: int, voters: int, max_work: int):
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if trials * voters > max_work:
        raise ValueError(f"trials * voters = {trials * voters} exceeds the limit {max_work}")


def estimate_distribution(k: int, n: int, trials: int, seed: int, workers: int = 1,
                          max_work: int = MAX_WORK) -> DistributionEstimate:
    _check_work(trials, k * n, max_work)
    block = max(1, min(BLOCK, (1 << 22) // (k * n)))
    jobs = [(k, n, seed, lo, hi) for lo, hi in _blocks(trials, block)]
    counts = sum(_run(_count_block, jobs, workers))
    return DistributionEstimate(np.asarray(counts, dtype=np.int64), trials, seed, k, n)


def brownian_event_estimate(steps: int, trials: int, seed: int, workers: int = 1,
                            max_work: int = MAX_WORK) -> float:
    """Fraction of trials where ``W1(1) <= min(W1+W2) <= max(W1+W2) <= W2(1)``."""
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    _check_work(trials, 2 * steps, max_work)
    block = max(1, min(BLOCK, (1 << 22) // (2 * steps)))
    jobs = [(steps, seed, lo, hi) for lo, hi in _blocks(trials, block)]
    return sum(_run(_walk_block, jobs, workers)) / trials


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    freq_D0: float
    freq_D1: float
    freq_D2: float
    exact_D2: float
    limit_D0: float
    se_D0: float
    se_D2: float

    FIELDS = ("n", "freq_D0", "freq_D1", "freq_D2", "exact_D2", "limit_D0")

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def convergence_table(n_values, trials: int, seed: int, workers: int = 1) -> list[ConvergenceRow]:
    n_values = list(n_values)
    if not n_values:
        raise ValueError("n_values must be nonempty")
    rows = []
    for n in n_values:
        est = estimate_distribution(2, n, trials, seed, workers)
        f, se = est.frequencies, est.std_errors
        rows.append(ConvergenceRow(n, float(f[0]), float(f[1]), float(f[2]),
                                   float(prob_d2_exact(n)), CLOSED_FORM,
                                   float(se[0]), float(se[2])))
    return rows


def trend_toward_limit(rows: list[ConvergenceRow]) -> bool:
    """Whether ``|freq_D0 - limit|`` is non-increasing down the table (reported only)."""
    gaps = [abs(r.freq_D0 - r.limit_D0) for r in rows]
    return all(b <= a for a, b in zip(gaps, gaps[1:]))
