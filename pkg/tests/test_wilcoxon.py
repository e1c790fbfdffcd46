import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import wilcoxon as scipy_wilcoxon

from driftstream.wilcoxon import TooFewPairs, sign_distribution, wilcoxon_signed_rank

FASE_AL = [96.40, 72.05, 73.36, 71.91, 66.86]
FIXED = [95.20, 71.40, 48.40, 60.43, 42.70]


def enumerate_p(diffs):
    """Two-sided p by listing every sign pattern (ranks averaged by hand)."""
    diffs = [d for d in diffs if d != 0]
    mags = sorted(abs(d) for d in diffs)
    rank = {}
    for m in set(mags):
        positions = [i + 1 for i, x in enumerate(mags) if x == m]
        rank[m] = sum(positions) / len(positions)
    ranks = [rank[abs(d)] for d in diffs]
    total = sum(ranks)
    t_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w = min(t_plus, total - t_plus)
    extreme = 0
    for signs in itertools.product((0, 1), repeat=len(ranks)):
        s = sum(r for r, keep in zip(ranks, signs) if keep)
        extreme += min(s, total - s) <= w + 1e-9
    return extreme / 2 ** len(ranks)


def test_all_positive_six():
    res = wilcoxon_signed_rank([(i + 2, 1) for i in range(6)])
    assert res.statistic == 0
    assert res.p_value == pytest.approx(2 / 2**6)
    assert res.significant


def test_identical_pairs_rejected():
    with pytest.raises(TooFewPairs):
        wilcoxon_signed_rank([(1.0, 1.0)] * 10)
    with pytest.raises(TooFewPairs):
        wilcoxon_signed_rank([(2.0, 1.0)] * 4 + [(1.0, 1.0)] * 6)


def test_symmetric_differences_not_significant():
    pairs = [(d, 0) for d in (1, -1, 2, -2, 3, -3, 4, -4)]
    res = wilcoxon_signed_rank(pairs)
    assert res.p_value > 0.9 and not res.significant


def test_sign_distribution_counts():
    counts = sign_distribution([2, 4, 6])  # doubled ranks 1, 2, 3
    assert counts.sum() == 8
    assert counts[[0, 2, 4, 6, 8, 10, 12]].tolist() == [1, 1, 1, 2, 1, 1, 1]


@settings(max_examples=300)
@given(st.lists(st.integers(-6, 6), min_size=5, max_size=12))
def test_exact_matches_enumeration_with_ties(diffs):
    if sum(d != 0 for d in diffs) < 5:
        return
    res = wilcoxon_signed_rank([(d, 0) for d in diffs], method="exact")
    assert res.p_value == pytest.approx(enumerate_p(diffs), abs=1e-12)


def test_exact_matches_scipy_without_ties():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(5, 21))
        x = rng.normal(rng.uniform(-1, 1), 1, n)
        pairs = [(v, 0.0) for v in x]
        for alt in ("two-sided", "greater", "less"):
            ours = wilcoxon_signed_rank(pairs, alt, method="exact").p_value
            theirs = scipy_wilcoxon(x, alternative=alt, method="exact").pvalue
            assert ours == pytest.approx(theirs, abs=1e-12)


def test_exact_and_normal_agree_at_twenty():
    rng = random.Random(1)
    for _ in range(500):
        shift = rng.uniform(-0.8, 0.8)
        pairs = [(rng.gauss(shift, 1), 0.0) for _ in range(20)]
        exact = wilcoxon_signed_rank(pairs, method="exact").p_value
        approx = wilcoxon_signed_rank(pairs, method="approx").p_value
        assert abs(exact - approx) <= 0.01


def test_large_samples_use_normal_branch():
    rng = np.random.default_rng(2)
    x = rng.normal(0.3, 1, 60)
    ours = wilcoxon_signed_rank([(v, 0.0) for v in x]).p_value
    theirs = scipy_wilcoxon(x, method="approx", correction=True).pvalue
    assert ours == pytest.approx(theirs, rel=1e-9)


def test_table_columns_one_sided():
    pairs = list(zip(FASE_AL, FIXED))
    assert all(a > b for a, b in pairs)
    assert wilcoxon_signed_rank(pairs, "greater").significant
    assert wilcoxon_signed_rank(pairs, "greater").p_value == pytest.approx(1 / 32)
    assert not wilcoxon_signed_rank(pairs).significant  # two-sided needs n >= 6


def test_argument_validation():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([(1, 0)] * 6, alternative="sideways")
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([(1, 0)] * 6, method="magic")
