"""Wilcoxon signed-rank test for paired samples.

Small samples (n <= 20 non-zero differences) get an exact p-value from the
full sign distribution; larger ones use the normal approximation with
continuity and tie corrections.
"""

from __future__ import annotations

import math
from statistics import NormalDist
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

EXACT_LIMIT = 20
MIN_PAIRS = 5
ALTERNATIVES = ("two-sided", "greater", "less")


class TooFewPairs(ValueError):
    pass


class WilcoxonResult(NamedTuple):
    statistic: float
    p_value: float
    significant: bool


def signed_ranks(paired: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Ranks of |a - b| (average ties, zeros dropped) and the signs of a - b."""
    diffs = np.array([a - b for a, b in paired], dtype=float)
    diffs = diffs[diffs != 0.0]
    return rankdata(np.abs(diffs), method="average"), np.sign(diffs)


def sign_distribution(doubled_ranks: Sequence[int]) -> np.ndarray:
    """counts[s] = number of sign patterns whose positive doubled-rank sum is s.

    Ranks are doubled so average ties (x.5) stay integral.
    """
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    reach = 0
    for r in doubled_ranks:
        r = int(r)
        counts[r:reach + r + 1] += counts[:reach + 1].copy()
        reach += r
    return counts


def _exact_p(ranks: np.ndarray, t_plus: float, alternative: str) -> float:
    doubled = np.rint(ranks * 2).astype(np.int64)
    counts = sign_distribution(doubled)
    patterns = float(counts.sum())
    total = int(doubled.sum())
    observed = int(round(t_plus * 2))
    if alternative == "greater":
        return counts[observed:].sum() / patterns
    if alternative == "less":
        return counts[:observed + 1].sum() / patterns
    w = min(observed, total - observed)
    sums = np.arange(total + 1)
    extreme = np.minimum(sums, total - sums) <= w
    return counts[extreme].sum() / patterns


def _approx_p(ranks: np.ndarray, t_plus: float, alternative: str) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - ((tie_sizes ** 3 - tie_sizes).sum()) / 48.0
    if var <= 0.0:
        return 1.0
    sd = math.sqrt(var)
    cdf = NormalDist().cdf
    if alternative == "greater":
        return 1.0 - cdf((t_plus - mean - 0.5) / sd)
    if alternative == "less":
        return cdf((t_plus - mean + 0.5) / sd)
    t_minus = n * (n + 1) / 2.0 - t_plus
    w = min(t_plus, t_minus)
    return min(1.0, 2.0 * cdf((w - mean + 0.5) / sd))


def wilcoxon_signed_rank(paired: Sequence[tuple[float, float]], alternative: str = "two-sided",
                         method: str = "auto", alpha: float = 0.05) -> WilcoxonResult:
    """Test whether paired values differ.

    ``alternative`` "greater" asks whether the first element of each pair
    tends to exceed the second. The statistic is always min(T+, T-).
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    if method not in ("auto", "exact", "approx"):
        raise ValueError("method must be auto, exact or approx")
    ranks, signs = signed_ranks(paired)
    n = len(ranks)
    if n < MIN_PAIRS:
        raise TooFewPairs(f"{n} non-zero differences; need at least {MIN_PAIRS}")
    t_plus = float(ranks[signs > 0].sum())
    t_minus = float(ranks[signs < 0].sum())
    exact = method == "exact" or (method == "auto" and n <= EXACT_LIMIT)
    p = _exact_p(ranks, t_plus, alternative) if exact else _approx_p(ranks, t_plus, alternative)
    p = float(min(1.0, p))
    return WilcoxonResult(min(t_plus, t_minus), p, p < alpha)
