"""Statistical primitives shared by the analysis pipeline.

Everything here is a pure function over plain sequences / small matrices.
p-values use scipy.special for the t and F distributions; the statistics
themselves are computed from their defining formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import InputError, UndefinedStatisticError

NORMALIZATION_TOL = 1e-9


def shannon_entropy(dist: Sequence[float]) -> float:
    """Entropy in bits; 0*log(0) is taken as 0."""
    p = np.asarray(dist, dtype=float)
    if p.size == 0 or np.any(p < 0):
        raise InputError("distribution must be non-negative and non-empty")
    if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
        raise InputError(f"distribution sums to {p.sum()!r}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def _t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    return float(special.stdtr(df, -t))


def pearson_r(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Product-moment correlation with a two-sided t-approximation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise InputError("pearson_r needs two equal-length vectors, n >= 3")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float((xd * xd).sum()) * float((yd * yd).sum()))
    if denom == 0.0:
        raise UndefinedStatisticError("pearson_r undefined for zero variance")
    r = float((xd * yd).sum()) / denom
    r = max(-1.0, min(1.0, r))
    n = x.size
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * _t_sf(abs(t), n - 2)
    return r, min(1.0, p)


def holm_bonferroni(p_values: Sequence[float]) -> list[float]:
    """Step-down Holm adjustment, returned in the input order."""
    ps = list(p_values)
    if any(p < 0 or p > 1 for p in ps):
        raise InputError("p-values must lie in [0, 1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        value = min(1.0, ps[idx] * (m - rank))
        running = max(running, value)
        adjusted[idx] = running
    return adjusted


@dataclass(frozen=True)
class RatingMatrix:
    """Items x categories counts of annotator choices, constant raters per item."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise InputError("rating matrix is empty")
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise InputError("rating matrix rows differ in category count")
        sums = {sum(r) for r in self.rows}
        if len(sums) != 1:
            raise InputError("rating matrix rows differ in annotator count")
        if any(v < 0 for r in self.rows for v in r):
            raise InputError("rating matrix counts must be non-negative")
        if self.raters < 2:
            raise InputError("need at least 2 annotators per item")

    @classmethod
    def build(cls, rows) -> "RatingMatrix":
        return cls(tuple(tuple(int(v) for v in r) for r in rows))

    @property
    def raters(self) -> int:
        return sum(self.rows[0])

    @property
    def n_items(self) -> int:
        return len(self.rows)

    def observed_agreement(self) -> float:
        n = self.raters
        total = 0.0
        for row in self.rows:
            total += sum(v * (v - 1) for v in row) / (n * (n - 1))
        return total / len(self.rows)

    def category_shares(self) -> list[float]:
        n_total = self.raters * self.n_items
        k = len(self.rows[0])
        return [sum(r[j] for r in self.rows) / n_total for j in range(k)]


def fleiss_kappa(matrix: RatingMatrix) -> float:
    """Fleiss' kappa for multiple raters on categorical items."""
    pa = matrix.observed_agreement()
    pe = sum(p * p for p in matrix.category_shares())
    if 1.0 - pe == 0.0:
        raise UndefinedStatisticError("fleiss_kappa undefined: chance agreement is 1")
    return (pa - pe) / (1.0 - pe)


def gwet_ac1(matrix: RatingMatrix) -> float:
    """Gwet's AC1: same observed agreement, different chance correction."""
    pa = matrix.observed_agreement()
    shares = matrix.category_shares()
    k = len(shares)
    if k < 2:
        raise InputError("gwet_ac1 needs at least 2 categories")
    pe = sum(p * (1.0 - p) for p in shares) / (k - 1)
    if 1.0 - pe == 0.0:
        raise UndefinedStatisticError("gwet_ac1 undefined: chance agreement is 1")
    return (pa - pe) / (1.0 - pe)


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's t statistic, Welch-Satterthwaite df, and two-sided p."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InputError("welch_t needs at least 2 observations per sample")
    va = float(a.var(ddof=1)) / a.size
    vb = float(b.var(ddof=1)) / b.size
    if va + vb == 0.0:
        raise UndefinedStatisticError("welch_t undefined: zero variance in both samples")
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    p = 2.0 * _t_sf(abs(t), df)
    return t, df, min(1.0, p)


@dataclass(frozen=True)
class OlsFit:
    slope: float
    intercept: float
    r_squared: float
    f_statistic: float
    p_value: float
    n: int


def ols(x: Sequence[float], y: Sequence[float]) -> OlsFit:
    """Simple least squares y ~ x with an F-test of the slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise InputError("ols needs two equal-length vectors, n >= 3")
    xd = x - x.mean()
    sxx = float((xd * xd).sum())
    if sxx == 0.0:
        raise UndefinedStatisticError("ols undefined: zero variance in x")
    slope = float((xd * (y - y.mean())).sum()) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float((resid * resid).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise UndefinedStatisticError("ols undefined: zero variance in y")
    r2 = 1.0 - ss_res / ss_tot
    n = x.size
    if ss_res == 0.0:
        return OlsFit(slope, intercept, 1.0, math.inf, 0.0, n)
    f = (ss_tot - ss_res) / (ss_res / (n - 2))
    p = float(special.fdtrc(1, n - 2, f))
    return OlsFit(slope, intercept, r2, f, min(1.0, p), n)


def lowess(x: Sequence[float], y: Sequence[float], frac: float = 0.6) -> np.ndarray:
    """Locally weighted linear regression (tricube, one robustness pass).

    Returns the smoothed y at every input x, in input order.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 5:
        raise InputError("lowess needs two equal-length vectors, n >= 5")
    if not (0.0 < frac <= 1.0):
        raise InputError("frac must be in (0, 1]")
    n = x.size
    k = max(2, int(math.ceil(frac * n)))
    robustness = np.ones(n)
    fitted = y.astype(float).copy()
    for _ in range(2):  # initial fit + one robustness iteration
        for i in range(n):
            d = np.abs(x - x[i])
            idx = np.argsort(d, kind="stable")[:k]
            h = d[idx].max()
            if h == 0.0:
                fitted[i] = float(
                    np.average(y[idx], weights=robustness[idx])
                    if robustness[idx].sum() > 0
                    else y[idx].mean()
                )
                continue
            w = (1.0 - np.clip(d[idx] / h, 0.0, 1.0) ** 3) ** 3
            w = w * robustness[idx]
            if w.sum() <= 0.0:
                fitted[i] = float(y[idx].mean())
                continue
            xi, yi = x[idx], y[idx]
            wx = float((w * xi).sum()) / w.sum()
            wy = float((w * yi).sum()) / w.sum()
            sxx = float((w * (xi - wx) ** 2).sum())
            if sxx == 0.0:
                fitted[i] = wy
            else:
                b = float((w * (xi - wx) * (yi - wy)).sum()) / sxx
                fitted[i] = wy + b * (x[i] - wx)
        resid = y - fitted
        s = float(np.median(np.abs(resid)))
        if s == 0.0:
            robustness = np.ones(n)
        else:
            robustness = np.clip(1.0 - (resid / (6.0 * s)) ** 2, 0.0, 1.0) ** 2
    return fitted


def mcnemar_exact(
    model_a_matches: Sequence[bool], model_b_matches: Sequence[bool]
) -> float:
    """Two-sided exact binomial test on discordant pairs."""
    a = list(model_a_matches)
    b = list(model_b_matches)
    if len(a) != len(b):
        raise InputError("mcnemar_exact needs paired vectors of equal length")
    n01 = sum(1 for ai, bi in zip(a, b) if ai and not bi)
    n10 = sum(1 for ai, bi in zip(a, b) if bi and not ai)
    n = n01 + n10
    if n == 0:
        return 1.0
    k = min(n01, n10)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    p = 2.0 * tail / (2**n)
    return min(1.0, p)
