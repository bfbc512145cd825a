import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ityness.corpus import LexiconEntry
from ityness.errors import DegenerateScoreError, InputError
from ityness.gcm import (
    DistanceMode,
    Exemplar,
    GcmModel,
    Kernel,
    default_grid,
    distance,
    exemplars_from_lexicon,
    fit_sensitivity,
    predict,
    score,
)
from ityness.morphlex import Base, SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS


class TestDistance:
    def test_identity(self):
        assert distance("aa", "aa") == 0.0

    def test_single_substitution(self):
        assert distance("aa", "ab") == 1.0

    def test_kitten_sitting(self):
        assert distance("kitten", "sitting") == 3.0

    def test_symmetry_and_normalization(self):
        assert distance("abc", "yabd") == distance("yabd", "abc")
        assert distance("abc", "abcdef", DistanceMode.LENGTH_NORMALIZED) == pytest.approx(
            3 / 6
        )

    @settings(max_examples=150)
    @given(st.text(alphabet="abcd", max_size=7), st.text(alphabet="abcd", max_size=7))
    def test_metric_properties(self, a, b):
        d = distance(a, b)
        assert d == distance(b, a)
        assert (d == 0.0) == (a == b)
        assert d <= max(len(a), len(b))


def naive_score(exemplars, query, c, kernel=Kernel.EXPONENTIAL):
    sums = {I: 0.0, N: 0.0}
    for e in exemplars:
        d = distance(query, e.form)
        if kernel == Kernel.GAUSSIAN:
            d = d * d
        sums[e.choice] += e.weight * math.exp(-c * d)
    total = sums[I] + sums[N]
    return {k: v / total for k, v in sums.items()}


class TestScore:
    def test_single_category_probability_one(self):
        m = GcmModel(
            [Exemplar("selfish", N, 1.0), Exemplar("zzzzzzzzzz", I, 1e-12)], 1.0
        )
        p = score(m, "boyish")
        assert p[N] > 0.999

    def test_symmetric_split(self):
        for c in (0.3, 1.0, 4.2):
            m = GcmModel([Exemplar("aa", I, 1.0), Exemplar("bb", N, 1.0)], c)
            p = score(m, "ab")
            assert p[I] == pytest.approx(0.5, abs=1e-12)

    def test_weight_share_at_equal_distance(self):
        m = GcmModel([Exemplar("aa", I, 3.0), Exemplar("bb", N, 1.0)], 1.7)
        p = score(m, "ab")
        assert p[I] == pytest.approx(0.75, abs=1e-12)

    def test_probabilities_sum_to_one(self):
        m = GcmModel(
            [Exemplar("abcde", I, 2.0), Exemplar("abfde", N, 5.0), Exemplar("xy", N, 1.0)],
            0.9,
        )
        p = score(m, "abcdf")
        assert abs(p[I] + p[N] - 1.0) < 1e-12
        assert 0.0 <= p[I] <= 1.0

    def test_degenerate_scores_raise(self):
        m = GcmModel(
            [Exemplar("aaaaaaaaaaaaaaaaaaaa", I, 1e-300), Exemplar("bbbbbbbbbbbbbbbbbbbb", N, 1e-300)],
            sensitivity=50.0,
        )
        with pytest.raises(DegenerateScoreError):
            score(m, "cccccccccccccccccccc")

    def test_needs_both_categories(self):
        with pytest.raises(InputError):
            GcmModel([Exemplar("selfish", N, 1.0)], 1.0)


@st.composite
def small_instance(draw):
    n = draw(st.integers(2, 8))
    exemplars = []
    has = set()
    for i in range(n):
        form = draw(st.text(alphabet="abcde", min_size=1, max_size=8))
        choice = draw(st.sampled_from([I, N]))
        weight = draw(st.floats(0.1, 50.0))
        exemplars.append(Exemplar(form, choice, weight))
        has.add(choice)
    if I not in has:
        exemplars[0] = Exemplar(exemplars[0].form, I, exemplars[0].weight)
    if N not in has:
        exemplars[-1] = Exemplar(exemplars[-1].form, N, exemplars[-1].weight)
    query = draw(st.text(alphabet="abcde", max_size=6))
    c = draw(st.floats(0.1, 5.0))
    return exemplars, query, c


@settings(max_examples=150, deadline=None)
@given(small_instance())
def test_score_matches_direct_summation(inst):
    exemplars, query, c = inst
    m = GcmModel(exemplars, c)
    got = score(m, query)
    want = naive_score(exemplars, query, c)
    assert got[I] == pytest.approx(want[I], abs=1e-9)
    assert got[N] == pytest.approx(want[N], abs=1e-9)


def test_gaussian_kernel_matches_direct_summation():
    exemplars = [Exemplar("abc", I, 2.0), Exemplar("abd", N, 1.0), Exemplar("xyz", N, 3.0)]
    m = GcmModel(exemplars, 0.8, kernel=Kernel.GAUSSIAN)
    got = score(m, "abe")
    want = naive_score(exemplars, "abe", 0.8, Kernel.GAUSSIAN)
    assert got[I] == pytest.approx(want[I], abs=1e-12)


class TestInvariances:
    def test_global_weight_scaling(self):
        ex = [Exemplar("abc", I, 2.0), Exemplar("abd", N, 7.0), Exemplar("bcd", N, 1.0)]
        scaled = [Exemplar(e.form, e.choice, e.weight * 123.4) for e in ex]
        m1, m2 = GcmModel(ex, 1.1), GcmModel(scaled, 1.1)
        for q in ("abc", "abe", "zzz"):
            p1, p2 = score(m1, q), score(m2, q)
            assert p1[I] == pytest.approx(p2[I], abs=1e-12)

    def test_duplicate_exemplar_equals_added_weight(self):
        m1 = GcmModel(
            [Exemplar("abc", I, 1.0), Exemplar("abc", I, 2.0), Exemplar("xyz", N, 1.0)], 0.9
        )
        m2 = GcmModel([Exemplar("abc", I, 3.0), Exemplar("xyz", N, 1.0)], 0.9)
        for q in ("abd", "xy"):
            assert score(m1, q)[I] == pytest.approx(score(m2, q)[I], abs=1e-12)

    def test_weight_monotonicity(self):
        base = [Exemplar("abc", I, 1.0), Exemplar("abd", N, 2.0), Exemplar("bce", I, 0.5)]
        boosted = [Exemplar("abc", I, 4.0), Exemplar("abd", N, 2.0), Exemplar("bce", I, 0.5)]
        for q in ("abe", "abc", "qqq"):
            assert score(GcmModel(boosted, 1.3), q)[I] >= score(GcmModel(base, 1.3), q)[I]


class TestPredict:
    def test_exact_match_dominates_with_large_c(self):
        m = GcmModel(
            [Exemplar("selfish", N, 1.0), Exemplar("selfush", I, 100.0)], sensitivity=12.0
        )
        assert predict(m, "selfish") is N

    def test_tie_goes_to_ity(self):
        m = GcmModel([Exemplar("aa", I, 1.0), Exemplar("bb", N, 1.0)], 1.0)
        assert predict(m, "ab") is I


def entry(form, ity, ness):
    return LexiconEntry(Base.from_form(form), 5, ity, ness)


class TestFitSensitivity:
    def test_separable_returns_smallest(self):
        entries = [
            entry("aaaaable", 3, 0),
            entry("aaabable", 2, 0),
            entry("aacaable", 4, 0),
            entry("zzzzzish", 0, 3),
            entry("zzzyzish", 0, 2),
            entry("zzxzzish", 0, 5),
        ]
        grid = [0.5, 1.0, 2.0]
        assert fit_sensitivity(entries, "type", grid) == 0.5

    def test_forced_failure_returns_smallest(self):
        entries = [entry("aaaaable", 1, 0), entry("aaabable", 0, 1)]
        # each base's only neighbor carries the opposite category
        assert fit_sensitivity(entries, "type", [0.7, 1.4]) == 0.7

    def test_empty_grid_rejected(self):
        with pytest.raises(InputError):
            fit_sensitivity([entry("aaaaable", 1, 1)], "type", [])

    def test_default_grid_shape(self):
        g = default_grid()
        assert len(g) == 25
        assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(5.0)
        assert all(a < b for a, b in zip(g, g[1:]))


def test_exemplars_from_lexicon_modes():
    entries = [entry("sensitive", 4, 9)]
    type_ex = exemplars_from_lexicon(entries, "type")
    token_ex = exemplars_from_lexicon(entries, "token")
    assert {(e.choice, e.weight) for e in type_ex} == {(I, 1.0), (N, 1.0)}
    assert {(e.choice, e.weight) for e in token_ex} == {(I, 4.0), (N, 9.0)}


def test_model_serialization_round_trip(tmp_path):
    ex = [Exemplar("selfish", N, 2.5), Exemplar("available", I, 1.0)]
    m = GcmModel(ex, 1.25, DistanceMode.RAW_EDIT, Kernel.EXPONENTIAL)
    path = tmp_path / "gcm.tsv"
    m.save(path)
    loaded = GcmModel.load(path)
    assert loaded.sensitivity == 1.25
    assert [(e.form, e.choice, e.weight) for e in loaded.exemplars] == [
        (e.form, e.choice, e.weight) for e in ex
    ]
