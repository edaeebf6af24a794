"""Rank correlation and two-sample tests.

Student-t tail probabilities go through the regularized incomplete beta
function (``scipy.special.betainc``, accurate to ~1e-14 over the ranges used
here)::

    P(|T| >= t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

from ..errors import ArgumentError, StatisticsError

EXACT_LIMIT = 12


def t_two_sided(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    if df <= 0:
        raise StatisticsError("degrees of freedom must be positive")
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def normal_two_sided(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


# -- Spearman ------------------------------------------------------------

@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p: float
    n: int
    method: str


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    sxx = float(da @ da)
    syy = float(db @ db)
    if sxx == 0.0 or syy == 0.0:
        raise StatisticsError("correlation is undefined for a constant vector")
    r = float(da @ db) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float], method: str = "t") -> SpearmanResult:
    """Spearman's rho with average ranks for ties.

    ``method="t"`` gives the two-sided p-value from the t approximation with
    ``n - 2`` degrees of freedom. ``method="exact"`` enumerates all ``n!``
    orderings of ``y``'s ranks (``n <= 8``).
    """
    if len(x) != len(y):
        raise ArgumentError("x and y must have equal length")
    n = len(x)
    if n < 3:
        raise ArgumentError("spearman needs at least 3 pairs")
    rx = rankdata(x)
    ry = rankdata(y)
    rho = _pearson(rx, ry)
    if method == "t":
        if abs(rho) == 1.0:
            p = 0.0
        else:
            t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
            p = t_two_sided(t, n - 2)
    elif method == "exact":
        if n > 8:
            raise ArgumentError("exact spearman is limited to n <= 8")
        perms = np.array(list(itertools.permutations(range(n))))
        dx = rx - rx.mean()
        dy = (ry - ry.mean())[perms]
        denom = math.sqrt(float(dx @ dx) * float(((ry - ry.mean()) ** 2).sum()))
        null = (dy @ dx) / denom
        p = float(np.mean(np.abs(null) >= abs(rho) - 1e-12))
    else:
        raise ArgumentError(f"unknown method {method!r}")
    return SpearmanResult(rho, p, n, method)


# -- Welch ---------------------------------------------------------------

@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_raw: float
    p_bonferroni: float


def bonferroni(p: float, m: int) -> float:
    if m < 1:
        raise ArgumentError("number of comparisons must be >= 1")
    return min(1.0, m * p)


def welch_t(a: Sequence[float], b: Sequence[float], comparisons: int = 1) -> WelchResult:
    """Welch's unequal-variance t-test, two-sided, Bonferroni-adjusted."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatisticsError("welch_t needs at least two observations per sample")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    if va == 0.0 and vb == 0.0:
        raise StatisticsError("both samples have zero variance")
    se2 = va + vb
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = float(se2 ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1)))
    p = t_two_sided(t, df)
    return WelchResult(t, df, p, bonferroni(p, comparisons))


# -- Mann-Whitney --------------------------------------------------------

@dataclass(frozen=True)
class MannWhitneyResult:
    u_a: float
    u_b: float
    w_a: float
    p: float
    method: str

    @property
    def u(self) -> float:
        return min(self.u_a, self.u_b)


def _tie_term(values) -> float:
    return float(sum(t ** 3 - t for t in Counter(values).values()))


def mann_whitney(a: Sequence[float], b: Sequence[float], method: str = "auto") -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    ``u_a`` counts pairs with ``a > b`` (ties count one half), and ``w_a`` is
    the rank sum of ``a``. ``auto`` uses exact enumeration of all label
    assignments when ``len(a) + len(b) <= 12`` and otherwise the normal
    approximation with tie and continuity corrections.
    """
    na, nb = len(a), len(b)
    if na < 1 or nb < 1:
        raise ArgumentError("mann_whitney needs non-empty samples")
    pooled = np.concatenate([np.asarray(a, float), np.asarray(b, float)])
    ranks = rankdata(pooled)
    w_a = float(ranks[:na].sum())
    u_a = w_a - na * (na + 1) / 2.0
    u_b = na * nb - u_a
    if method == "auto":
        method = "exact" if na + nb <= EXACT_LIMIT else "asymptotic"
    mu = na * nb / 2.0
    if method == "exact":
        total = 0
        extreme = 0
        dev = abs(u_a - mu)
        offset = na * (na + 1) / 2.0
        for idx in itertools.combinations(range(na + nb), na):
            u = sum(ranks[i] for i in idx) - offset
            total += 1
            if abs(u - mu) >= dev - 1e-9:
                extreme += 1
        p = extreme / total
    elif method == "asymptotic":
        n = na + nb
        var = na * nb / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1))) if n > 1 else 0.0
        if var <= 0.0:
            p = 1.0
        else:
            z = (abs(u_a - mu) - 0.5) / math.sqrt(var)
            p = 1.0 if z <= 0 else min(1.0, normal_two_sided(z))
    else:
        raise ArgumentError(f"unknown method {method!r}")
    return MannWhitneyResult(u_a, u_b, w_a, p, method)
