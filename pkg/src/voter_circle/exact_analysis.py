"""Exact finite-n results for two districts.

With ``P`` positive votes among ``2n``, both districts can be carried exactly
when ``P >= 2*floor(n/2 + 1)``. Probabilities here are ``Fraction`` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .voter_model import VoteSequence, optimal_gerrymander


def majority_threshold(n: int) -> int:
    """Positive votes needed to carry a district of ``n`` voters."""
    return n // 2 + 1


def sweep_threshold(n: int) -> int:
    """Smallest total ``P`` for which both districts can be carried."""
    return 2 * majority_threshold(n)


def prob_d2_exact(n: int) -> Fraction:
    """``Pr(D_n = 2)`` as an exact rational."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    p = Fraction(1, 2) - Fraction(comb(2 * n, n), 2 ** (2 * n + 1))
    if n % 2 == 0:
        p -= Fraction(comb(2 * n, n + 1), 2 ** (2 * n))
    return p


def prob_d2_by_tail(n: int) -> Fraction:
    """``Pr(P >= 2*floor(n/2+1))`` summed term by term from the binomial pmf."""
    total = sum(comb(2 * n, p) for p in range(sweep_threshold(n), 2 * n + 1))
    return Fraction(total, 2 ** (2 * n))


@dataclass(frozen=True)
class WindowStatistics:
    n: int
    P: int
    P_i: np.ndarray
    s: np.ndarray
    A: np.ndarray
    B: np.ndarray
    all_windows_nonpositive: bool
    walk_event: bool

    @property
    def identity_holds(self) -> bool:
        return self.all_windows_nonpositive == self.walk_event


def _require_two(v: VoteSequence):
    if v.k != 2:
        raise ValueError(f"two districts required, got k={v.k}")


def walk_arrays(v: VoteSequence) -> WindowStatistics:
    """Window counts and the two walks ``A_i``, ``B_i`` for ``i = 0..n``.

    ``walk_event`` is ``A_n <= A_i - B_i <= -B_n`` for every ``i``, which must
    coincide with every length-``n`` window having a nonpositive sum.
    """
    _require_two(v)
    n = v.n
    x = v.votes.astype(np.int64)
    A = np.concatenate([[0], np.cumsum(x[:n])])
    B = np.concatenate([[0], np.cumsum(x[n:])])
    pos = (x > 0).astype(np.int64)
    ext = np.concatenate([[0], np.cumsum(np.concatenate([pos, pos]))])
    P_i = ext[n : 3 * n] - ext[: 2 * n]
    P = int(pos.sum())
    idx = np.arange(n + 1)
    s = P_i[idx % (2 * n)] - P_i[(idx + n) % (2 * n)]

    window = 2 * P_i - n
    all_nonpositive = bool(np.all(window <= 0))
    diff = A - B
    walk_event = bool(np.all((A[n] <= diff) & (diff <= -B[n])))
    return WindowStatistics(n, P, P_i, s, A, B, all_nonpositive, walk_event)


@dataclass(frozen=True)
class IVTWitness:
    holds: bool
    predicted_sweep: bool
    d: int
    P: int
    threshold: int
    witness: int | None = None


def verify_ivt_characterization(v: VoteSequence) -> IVTWitness:
    """Check ``P >= 2*floor(n/2+1)`` against the optimal ``d`` for one sequence.

    When the count clears the threshold and the opposite windows at 0 and n
    differ by two or more, the first index where ``s_j`` crosses back into
    ``[-1, 1]`` is returned as the witness.
    """
    _require_two(v)
    stats = walk_arrays(v)
    n = v.n
    threshold = sweep_threshold(n)
    predicted = stats.P >= threshold
    d = optimal_gerrymander(v).d
    witness = None
    if predicted and abs(int(stats.s[0])) >= 2:
        s = stats.s if stats.s[0] > 0 else -stats.s
        below = np.nonzero(s < 2)[0]
        witness = int(below[0])
    return IVTWitness(predicted == (d == 2), predicted, d, stats.P, threshold, witness)
