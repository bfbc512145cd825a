import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ityness.errors import InputError, UndefinedStatisticError
from ityness.stats import (
    RatingMatrix,
    fleiss_kappa,
    gwet_ac1,
    holm_bonferroni,
    lowess,
    mcnemar_exact,
    ols,
    pearson_r,
    shannon_entropy,
    welch_t,
)


class TestEntropy:
    def test_uniform_two_categories(self):
        assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate(self):
        assert shannon_entropy([1.0, 0.0]) == 0.0

    def test_unnormalized_rejected(self):
        with pytest.raises(InputError):
            shannon_entropy([0.5, 0.6])
        with pytest.raises(InputError):
            shannon_entropy([-0.1, 1.1])

    @settings(max_examples=100)
    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
    def test_matches_naive_sum(self, raw):
        p = [v / sum(raw) for v in raw]
        naive = -sum(v * math.log2(v) for v in p if v > 0)
        assert shannon_entropy(p) == pytest.approx(naive, abs=1e-9)

    def test_maximal_iff_uniform(self):
        assert shannon_entropy([0.3, 0.7]) < 1.0


class TestPearson:
    def test_perfect(self):
        x = [1.0, 2.0, 3.0, 4.0]
        r, p = pearson_r(x, x)
        assert r == 1.0 and p == 0.0
        r, _ = pearson_r(x, [-v for v in x])
        assert r == -1.0

    def test_zero_variance_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            pearson_r([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    @settings(max_examples=100)
    @given(
        st.lists(
            st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
            min_size=3,
            max_size=20,
        )
    )
    def test_matches_naive_formula(self, pairs):
        x = [a for a, _ in pairs]
        y = [b + 1e-3 * i for i, (_, b) in enumerate(pairs)]  # avoid exact const
        n = len(x)
        mx, my = sum(x) / n, sum(y) / n
        sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
        sxx = sum((a - mx) ** 2 for a in x)
        syy = sum((b - my) ** 2 for b in y)
        if sxx == 0 or syy == 0:
            return
        naive = sxy / math.sqrt(sxx * syy)
        r, p = pearson_r(x, y)
        assert r == pytest.approx(max(-1.0, min(1.0, naive)), abs=1e-9)
        assert 0.0 <= p <= 1.0

    def test_affine_invariance(self):
        x = [1.0, 4.0, 2.0, 8.0, 5.0]
        y = [2.0, 3.0, 1.0, 9.0, 4.0]
        r1, _ = pearson_r(x, y)
        r2, _ = pearson_r([3 * v + 7 for v in x], [0.5 * v - 2 for v in y])
        assert r1 == pytest.approx(r2, abs=1e-12)


class TestHolm:
    def test_single_p_unchanged(self):
        assert holm_bonferroni([0.2]) == [0.2]

    def test_worked_example(self):
        assert holm_bonferroni([0.01, 0.04, 0.03]) == pytest.approx(
            [0.03, 0.06, 0.06]
        )

    def test_all_ones(self):
        assert holm_bonferroni([1.0, 1.0, 1.0]) == [1.0, 1.0, 1.0]

    def test_out_of_range_rejected(self):
        with pytest.raises(InputError):
            holm_bonferroni([0.5, 1.5])

    @settings(max_examples=100)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
    def test_matches_naive_stepdown(self, ps):
        # naive: for each i, adjusted = max over j with p_j <= p_i of p_j*(m-rank_j)
        m = len(ps)
        order = sorted(range(m), key=lambda i: ps[i])
        naive = [0.0] * m
        best = 0.0
        for rank, idx in enumerate(order):
            best = max(best, min(1.0, ps[idx] * (m - rank)))
            naive[idx] = best
        got = holm_bonferroni(ps)
        assert got == pytest.approx(naive, abs=1e-12)
        # monotone in the sorted order, all within [0, 1]
        assert all(0.0 <= v <= 1.0 for v in got)
        sorted_adj = [got[i] for i in order]
        assert all(a <= b + 1e-15 for a, b in zip(sorted_adj, sorted_adj[1:]))


def rating(rows):
    return RatingMatrix.build(rows)


class TestAgreement:
    def test_perfect_agreement_kappa_and_ac1(self):
        m = rating([[4, 0], [0, 4], [4, 0]])
        assert fleiss_kappa(m) == pytest.approx(1.0)
        assert gwet_ac1(m) == pytest.approx(1.0)

    def test_chance_level_kappa_zero(self):
        # brute-force search over tiny two-rater matrices for observed == chance
        found = None
        rows_options = [(2, 0), (1, 1), (0, 2)]
        import itertools

        for combo in itertools.product(rows_options, repeat=4):
            m = RatingMatrix.build(combo)
            pa = m.observed_agreement()
            pe = sum(p * p for p in m.category_shares())
            if pe < 1.0 and abs(pa - pe) < 1e-12:
                found = combo
                break
        assert found is not None
        assert fleiss_kappa(RatingMatrix.build(found)) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            fleiss_kappa(rating([[3, 0], [3, 0]]))

    def test_matches_naive_formulas(self):
        rows = [[7, 4], [2, 9], [11, 0], [5, 6], [8, 3]]
        m = rating(rows)
        n = 11
        N = len(rows)
        p_i = [(sum(v * v for v in r) - n) / (n * (n - 1)) for r in rows]
        pa = sum(p_i) / N
        pj = [sum(r[j] for r in rows) / (N * n) for j in range(2)]
        pe_k = sum(v * v for v in pj)
        pe_g = sum(v * (1 - v) for v in pj) / 1
        assert fleiss_kappa(m) == pytest.approx((pa - pe_k) / (1 - pe_k), abs=1e-12)
        assert gwet_ac1(m) == pytest.approx((pa - pe_g) / (1 - pe_g), abs=1e-12)

    def test_row_validation(self):
        with pytest.raises(InputError):
            rating([[2, 0], [1, 0]])
        with pytest.raises(InputError):
            rating([[1, 0]])


class TestWelch:
    def test_identical_samples(self):
        t, df, p = welch_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert t == 0.0 and p == pytest.approx(1.0)

    def test_large_separation_small_p(self):
        a = [100.0 + i * 0.1 for i in range(20)]
        b = [0.0 + i * 0.1 for i in range(20)]
        t, df, p = welch_t(a, b)
        assert t > 50 and p < 1e-10

    def test_matches_naive_formula(self):
        rng = np.random.default_rng(7)
        a = rng.normal(0, 1, 15)
        b = rng.normal(0.5, 2, 25)
        t, df, _ = welch_t(a, b)
        va, vb = a.var(ddof=1) / 15, b.var(ddof=1) / 25
        assert t == pytest.approx((a.mean() - b.mean()) / math.sqrt(va + vb), abs=1e-9)
        assert df == pytest.approx(
            (va + vb) ** 2 / (va**2 / 14 + vb**2 / 24), abs=1e-9
        )


class TestOls:
    def test_exact_line(self):
        x = [0.0, 1.0, 2.0, 3.0]
        fit = ols(x, [2 * v + 1 for v in x])
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_constant_y_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            ols([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_constant_x_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            ols([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_matches_polyfit(self):
        rng = np.random.default_rng(3)
        x = rng.normal(0, 2, 40)
        y = 1.5 * x - 0.3 + rng.normal(0, 0.5, 40)
        fit = ols(x, y)
        slope, intercept = np.polyfit(x, y, 1)
        assert fit.slope == pytest.approx(slope, abs=1e-9)
        assert fit.intercept == pytest.approx(intercept, abs=1e-9)
        resid = y - (fit.intercept + fit.slope * x)
        r2 = 1 - (resid**2).sum() / ((y - y.mean()) ** 2).sum()
        assert fit.r_squared == pytest.approx(r2, abs=1e-12)
        f = (r2 / (1 - r2)) * (40 - 2)
        assert fit.f_statistic == pytest.approx(f, rel=1e-9)


def naive_lowess(x, y, frac):
    """Direct per-point weighted linear fit; same tricube + 1 robustness pass."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    k = max(2, int(math.ceil(frac * n)))
    robust = np.ones(n)
    fitted = y.copy()
    for _ in range(2):
        for i in range(n):
            d = np.abs(x - x[i])
            idx = np.argsort(d, kind="stable")[:k]
            h = d[idx].max()
            w = np.ones(len(idx)) if h == 0 else (1 - np.clip(d[idx] / h, 0, 1) ** 3) ** 3
            w = w * robust[idx]
            if w.sum() == 0:
                fitted[i] = y[idx].mean()
                continue
            if h == 0:
                fitted[i] = np.average(y[idx], weights=w)
                continue
            W = np.diag(w)
            A = np.column_stack([np.ones(len(idx)), x[idx]])
            coef, *_ = np.linalg.lstsq(np.sqrt(W) @ A, np.sqrt(w) * y[idx], rcond=None)
            fitted[i] = coef[0] + coef[1] * x[i]
        resid = y - fitted
        s = np.median(np.abs(resid))
        robust = np.ones(n) if s == 0 else np.clip(1 - (resid / (6 * s)) ** 2, 0, 1) ** 2
    return fitted


class TestLowess:
    def test_linear_data_reproduced(self):
        x = np.linspace(0, 10, 30)
        y = 3 * x - 2
        out = lowess(x, y, frac=0.5)
        assert np.max(np.abs(out - y)) < 1e-6

    def test_frac_one_on_linear_data_is_global_fit(self):
        x = np.linspace(0, 5, 12)
        y = -2 * x + 4
        out = lowess(x, y, frac=1.0)
        assert np.max(np.abs(out - y)) < 1e-6

    def test_noisy_sine_beats_raw_noise(self):
        rng = np.random.default_rng(11)
        x = np.linspace(0, 2 * np.pi, 120)
        truth = np.sin(x)
        noise = rng.normal(0, 0.3, x.size)
        y = truth + noise
        smoothed = lowess(x, y, frac=0.25)
        rms_smooth = np.sqrt(np.mean((smoothed - truth) ** 2))
        rms_noise = np.sqrt(np.mean(noise**2))
        assert rms_smooth < rms_noise

    def test_matches_naive_reference(self):
        rng = np.random.default_rng(5)
        x = np.sort(rng.uniform(0, 10, 40))
        y = np.cos(x) + rng.normal(0, 0.2, 40)
        mine = lowess(x, y, frac=0.4)
        ref = naive_lowess(x, y, 0.4)
        assert np.max(np.abs(mine - ref)) < 1e-9

    def test_statsmodels_agreement(self):
        from statsmodels.nonparametric.smoothers_lowess import lowess as sm_lowess

        rng = np.random.default_rng(9)
        x = np.sort(rng.uniform(0, 10, 60))
        y = np.sin(x) + rng.normal(0, 0.2, 60)
        mine = lowess(x, y, frac=0.4)
        ref = sm_lowess(y, x, frac=0.4, it=1, return_sorted=False)
        # different neighbor-window conventions allow small discrepancies
        assert np.corrcoef(mine, ref)[0, 1] > 0.99

    def test_bad_frac_rejected(self):
        with pytest.raises(InputError):
            lowess([1, 2, 3, 4, 5], [1, 2, 3, 4, 5], frac=0.0)


class TestMcnemar:
    def test_identical_vectors(self):
        assert mcnemar_exact([True, False, True], [True, False, True]) == 1.0

    def test_ten_vs_zero(self):
        a = [True] * 10 + [True] * 5
        b = [False] * 10 + [True] * 5
        assert mcnemar_exact(a, b) == pytest.approx(2 * (0.5**10), abs=1e-12)

    def test_five_vs_five_capped(self):
        a = [True] * 5 + [False] * 5
        b = [False] * 5 + [True] * 5
        assert mcnemar_exact(a, b) == 1.0

    @settings(max_examples=100)
    @given(st.integers(0, 12), st.integers(0, 12))
    def test_matches_exact_binomial(self, n01, n10):
        a = [True] * n01 + [False] * n10 + [True, False]
        b = [False] * n01 + [True] * n10 + [True, False]
        n = n01 + n10
        if n == 0:
            expected = 1.0
        else:
            k = min(n01, n10)
            expected = min(1.0, 2 * sum(math.comb(n, i) for i in range(k + 1)) / 2**n)
        assert mcnemar_exact(a, b) == pytest.approx(expected, abs=1e-12)
