import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import mannwhitneyu

from feedbackclf.stattest import exact_upper_tail, rank_sum_counts, wilcoxon_rank_sum, wilcoxon_signed_rank


def brute_force_p(x, y):
    """P(W >= observed) by enumerating every assignment of ranks to the first sample."""
    n, m = len(x), len(y)
    pooled = sorted(list(x) + list(y))
    ranks = {v: i + 1 for i, v in enumerate(pooled)}
    w = sum(ranks[v] for v in x)
    hits = total = 0
    for combo in itertools.combinations(range(1, n + m + 1), n):
        total += 1
        hits += sum(combo) >= w
    return hits / total


def distinct_samples(max_size=6):
    return st.integers(1, max_size).flatmap(lambda n: st.integers(1, max_size).flatmap(
        lambda m: st.lists(st.integers(-1000, 1000), min_size=n + m, max_size=n + m, unique=True)
        .map(lambda v: (v[:n], v[n:]))))


class TestExact:
    def test_all_greater_five_five(self):
        res = wilcoxon_rank_sum([6, 7, 8, 9, 10], [1, 2, 3, 4, 5])
        assert res.method == "exact"
        assert res.p_one_sided == pytest.approx(1 / 252, abs=1e-15)
        assert res.significant and res.star == "*"

    def test_identical_distributions_not_significant(self):
        res = wilcoxon_rank_sum([1, 4, 5, 8, 9], [2, 3, 6, 7, 10])
        assert not res.significant and res.star == ""

    @given(distinct_samples())
    @settings(max_examples=300)
    def test_matches_enumeration(self, xy):
        x, y = xy
        assert abs(wilcoxon_rank_sum(x, y).p_one_sided - brute_force_p(x, y)) <= 1e-12

    @given(distinct_samples())
    @settings(max_examples=200)
    def test_matches_scipy_exact(self, xy):
        x, y = xy
        ref = mannwhitneyu(x, y, alternative="greater", method="exact").pvalue
        assert wilcoxon_rank_sum(x, y).p_one_sided == pytest.approx(ref, abs=1e-12)

    @given(distinct_samples(), st.integers(-50, 50))
    @settings(max_examples=100)
    def test_shift_invariance(self, xy, c):
        x, y = xy
        a = wilcoxon_rank_sum(x, y).p_one_sided
        b = wilcoxon_rank_sum([v + c for v in x], [v + c for v in y]).p_one_sided
        assert a == b

    @given(distinct_samples())
    @settings(max_examples=100)
    def test_swap_identity(self, xy):
        x, y = xy
        assert wilcoxon_rank_sum(x, y, "greater").p_one_sided == pytest.approx(
            wilcoxon_rank_sum(y, x, "less").p_one_sided, abs=1e-12)

    @pytest.mark.parametrize("n, m", [(1, 1), (3, 4), (5, 5), (6, 2)])
    def test_counts_sum_to_binomial(self, n, m):
        assert sum(rank_sum_counts(n, m)) == math.comb(n + m, n)

    def test_tail_of_minimum_is_one(self):
        assert exact_upper_tail(15, 5, 5) == 1.0

    def test_exact_with_ties_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([1, 2], [2, 3], method="exact")


class TestNormal:
    def test_ties_use_normal_approximation(self):
        res = wilcoxon_rank_sum([0.9, 0.9, 0.91, 0.92, 0.9], [0.9, 0.88, 0.89, 0.9, 0.87])
        assert res.method == "normal_approx"
        ref = mannwhitneyu([0.9, 0.9, 0.91, 0.92, 0.9], [0.9, 0.88, 0.89, 0.9, 0.87],
                           alternative="greater", method="asymptotic", use_continuity=True).pvalue
        assert res.p_one_sided == pytest.approx(ref, rel=1e-10)

    def test_large_samples_match_scipy(self):
        rng = np.random.default_rng(0)
        x, y = rng.normal(0.3, 1, 30), rng.normal(0, 1, 25)
        res = wilcoxon_rank_sum(x, y)
        ref = mannwhitneyu(x, y, alternative="greater", method="asymptotic").pvalue
        assert res.method == "normal_approx"
        assert res.p_one_sided == pytest.approx(ref, rel=1e-10)

    def test_all_tied_gives_one(self):
        assert wilcoxon_rank_sum([1, 1, 1], [1, 1, 1]).p_one_sided == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([], [1.0])


class TestSignedRank:
    def test_all_positive_differences(self):
        res = wilcoxon_signed_rank([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
        assert res.p_one_sided == pytest.approx(1 / 32)

    def test_no_differences(self):
        assert wilcoxon_signed_rank([1, 2], [1, 2]).p_one_sided == 1.0
