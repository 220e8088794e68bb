"""Rank statistics and significance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, InputError, LengthMismatch


@dataclass(frozen=True)
class RankVector:
    values: np.ndarray
    ranks: np.ndarray


def rank_average(x) -> RankVector:
    """1-based ranks, ties sharing the mean of their positions."""
    x = np.asarray(x, dtype=float).reshape(-1)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    sx = x[order]
    start = 0
    for stop in range(1, len(x) + 1):
        if stop == len(x) or sx[stop] != sx[start]:
            ranks[order[start:stop]] = 0.5 * (start + stop - 1) + 1.0
            start = stop
    return RankVector(values=x, ranks=ranks)


def _pair(x, y, min_len=1):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise InputError(f"need at least {min_len} observations, got {len(x)}")
    return x, y


def pearson(x, y) -> float:
    x, y = _pair(x, y, 2)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def srocc(x, y) -> float:
    """Spearman rank-order correlation (Pearson correlation of average ranks)."""
    x, y = _pair(x, y, 3)
    rx, ry = rank_average(x).ranks, rank_average(y).ranks
    if np.array_equal(rx, ry):
        if np.all(rx == rx[0]):
            raise DegenerateInput("zero rank variance")
        return 1.0
    return pearson(rx, ry)


# -- F distribution ----------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise InputError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    lbt = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: float, d2: float) -> float:
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


def f_sf(x: float, d1: float, d2: float) -> float:
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))


def f_critical(alpha: float, d1: float, d2: float) -> float:
    """Upper ``alpha`` critical value of F(d1, d2), by bisection on the survival function."""
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    lo, hi = 0.0, 1.0
    while f_sf(hi, d1, d2) > alpha:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f_sf(mid, d1, d2) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- tests -------------------------------------------------------------------


def srocc_significance(r: float, n: int, alpha: float = 0.05) -> tuple[float, bool]:
    """F statistic (``t**2``) for the null hypothesis of zero rank correlation."""
    if n < 3:
        raise InputError("need n >= 3")
    if abs(r) >= 1.0:
        raise DegenerateInput("|r| = 1 gives an infinite statistic")
    t2 = r * r * (n - 2) / (1.0 - r * r)
    return t2, bool(t2 > f_critical(alpha, 1, n - 2))


def rank_differences(predicted, mos) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Signed ``rank(predicted_i) - rank(mos_i)`` plus an integer histogram.

    Returns ``(differences, bins, counts)`` with ``bins`` spanning
    ``-(n-1) .. n-1``. Average ranks are used, so ties can produce
    half-integer differences; those fall into the bin obtained by rounding
    half away from zero.
    """
    p, m = _pair(predicted, mos, 1)
    diff = rank_average(p).ranks - rank_average(m).ranks
    n = len(diff)
    bins = np.arange(-(n - 1), n, dtype=np.int64)
    binned = (np.sign(diff) * np.floor(np.abs(diff) + 0.5)).astype(np.int64)
    counts = np.bincount(binned + (n - 1), minlength=len(bins)).astype(np.int64)
    return diff, bins, counts


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df_between: int
    df_within: int
    p_value: float
    significant: bool


def one_way_anova(groups, alpha: float = 0.01) -> AnovaResult:
    groups = [np.asarray(g, dtype=float).reshape(-1) for g in groups]
    if len(groups) < 2:
        raise InputError("need at least two groups")
    if any(len(g) < 2 for g in groups):
        raise InputError("each group needs at least two values")
    allv = np.concatenate(groups)
    grand = allv.mean()
    ss_between = float(sum(len(g) * (g.mean() - grand) ** 2 for g in groups))
    ss_within = float(sum(((g - g.mean()) ** 2).sum() for g in groups))
    df_b = len(groups) - 1
    df_w = len(allv) - len(groups)
    if ss_within == 0.0:
        if ss_between == 0.0:
            raise DegenerateInput("no variance within or between groups")
        F = math.inf
    else:
        F = (ss_between / df_b) / (ss_within / df_w)
    p = f_sf(F, df_b, df_w)
    return AnovaResult(F=F, df_between=df_b, df_within=df_w, p_value=p,
                       significant=bool(F > f_critical(alpha, df_b, df_w)))
