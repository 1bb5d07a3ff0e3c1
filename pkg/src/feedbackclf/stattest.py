"""One-sided Wilcoxon rank-sum test (and a paired signed-rank variant).

For small tie-free samples the p-value comes from the exact null
distribution of the rank sum; otherwise a normal approximation with tie and
continuity correction is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_TOTAL = 20


@dataclass(frozen=True)
class RankSumResult:
    statistic: float
    p_one_sided: float
    method: str
    n: int
    m: int
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.p_one_sided < self.alpha

    @property
    def star(self) -> str:
        return "*" if self.significant else ""


@lru_cache(maxsize=None)
def rank_sum_counts(n: int, m: int) -> tuple[int, ...]:
    """Number of size-``n`` subsets of ranks ``1..n+m`` with each rank sum.

    Index ``s`` of the returned tuple holds the count for sum ``s``.
    """
    total = n + m
    max_sum = sum(range(total - n + 1, total + 1))
    # ways[j][s]: subsets of size j from the ranks seen so far with sum s
    ways = [[0] * (max_sum + 1) for _ in range(n + 1)]
    ways[0][0] = 1
    for rank in range(1, total + 1):
        for j in range(min(rank, n), 0, -1):
            row, prev = ways[j], ways[j - 1]
            for s in range(max_sum, rank - 1, -1):
                if prev[s - rank]:
                    row[s] += prev[s - rank]
    return tuple(ways[n])


def exact_upper_tail(statistic: float, n: int, m: int) -> float:
    """P(W >= statistic) under H0 for the rank sum W of a size-n sample."""
    counts = rank_sum_counts(n, m)
    hit = sum(counts[math.ceil(statistic - 1e-9):])
    return hit / math.comb(n + m, n)


def wilcoxon_rank_sum(x: Sequence[float], y: Sequence[float],
                      alternative: str = "greater", alpha: float = 0.05,
                      method: str = "auto") -> RankSumResult:
    """Test whether ``x`` tends to be larger (``"greater"``) or smaller than ``y``.

    ``method`` is ``"auto"`` (exact when ``n + m <= 20`` and no ties),
    ``"exact"`` or ``"normal_approx"``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = len(x), len(y)
    if n == 0 or m == 0:
        raise ValueError("both samples must be non-empty")
    if alternative not in ("greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")

    ranks = rankdata(np.concatenate([x, y]))
    w = float(ranks[:n].sum())
    has_ties = len(np.unique(ranks)) < n + m
    if method == "auto":
        method = "exact" if (n + m <= EXACT_MAX_TOTAL and not has_ties) else "normal_approx"
    if method == "exact" and has_ties:
        raise ValueError("exact method requires tie-free samples")

    if method == "exact":
        if alternative == "greater":
            p = exact_upper_tail(w, n, m)
        else:
            # reflect: rank r -> N+1-r maps W to n(N+1) - W
            p = exact_upper_tail(n * (n + m + 1) - w, n, m)
    else:
        p = _normal_tail(w, ranks, n, m, alternative)
    return RankSumResult(w, float(min(1.0, p)), method, n, m, alpha)


def _normal_tail(w, ranks, n, m, alternative):
    total = n + m
    mean = n * (total + 1) / 2
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (total * (total - 1)) if total > 1 else 0.0
    var = n * m / 12 * ((total + 1) - tie_term)
    if var <= 0:
        return 1.0
    diff = w - mean
    if alternative == "less":
        diff = -diff
    z = (diff - 0.5) / math.sqrt(var)
    return float(norm.sf(z))


@dataclass(frozen=True)
class SignedRankResult:
    statistic: float
    p_one_sided: float
    method: str
    n: int
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.p_one_sided < self.alpha


@lru_cache(maxsize=None)
def _signed_rank_counts(n: int) -> tuple[int, ...]:
    max_sum = n * (n + 1) // 2
    ways = [0] * (max_sum + 1)
    ways[0] = 1
    for r in range(1, n + 1):
        for s in range(max_sum, r - 1, -1):
            ways[s] += ways[s - r]
    return tuple(ways)


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float],
                         alternative: str = "greater", alpha: float = 0.05) -> SignedRankResult:
    """Paired variant for fold-matched scores; zero differences are dropped."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if alternative == "less":
        d = -d
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return SignedRankResult(0.0, 1.0, "exact", 0, alpha)
    ranks = rankdata(np.abs(d))
    t_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_TOTAL and len(np.unique(ranks)) == n:
        counts = _signed_rank_counts(n)
        p = sum(counts[math.ceil(t_plus - 1e-9):]) / 2 ** n
        return SignedRankResult(t_plus, float(p), "exact", n, alpha)
    mean = n * (n + 1) / 4
    _, tc = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(tc ** 3 - tc)) / 48
    if var <= 0:
        return SignedRankResult(t_plus, 1.0, "normal_approx", n, alpha)
    p = float(norm.sf((t_plus - mean - 0.5) / math.sqrt(var)))
    return SignedRankResult(t_plus, p, "normal_approx", n, alpha)
