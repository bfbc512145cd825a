import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ityness.errors import InputError, NoCoverageError
from ityness.mgl import (
    ANY,
    MglModel,
    MglRule,
    Mode,
    RuleContext,
    adjusted_confidence,
    generalize_contexts,
    minimal_generalize,
    predict,
    train,
    z_for_alpha,
)
from ityness.morphlex import SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS


def rule(output, free, slot, literal):
    return MglRule(output, RuleContext(free, slot, literal), 0, 0, 0, 0)


class TestMinimalGeneralize:
    def test_shared_ish_context(self):
        got = minimal_generalize(
            rule(N, False, None, "selfish"), rule(N, False, None, "boyish")
        )
        assert got is not None
        assert got.context == RuleContext(True, frozenset("fy"), "ish")

    def test_identical_contexts_unchanged(self):
        r = rule(N, True, frozenset("ab"), "ish")
        got = minimal_generalize(r, r)
        assert got.context == r.context

    def test_output_mismatch_returns_none(self):
        assert minimal_generalize(
            rule(N, False, None, "selfish"), rule(I, False, None, "boyish")
        ) is None

    def test_no_shared_final_character(self):
        assert generalize_contexts(
            RuleContext(False, None, "abc"), RuleContext(False, None, "abd")
        ) is None

    def test_exact_length_pair_has_no_free_variable(self):
        got = generalize_contexts(
            RuleContext(False, None, "mat"), RuleContext(False, None, "cat")
        )
        assert got == RuleContext(False, frozenset("mc"), "at")

    def test_word_that_is_a_suffix_of_the_other(self):
        got = generalize_contexts(
            RuleContext(False, None, "oral"), RuleContext(False, None, "moral")
        )
        assert got == RuleContext(True, None, "oral")

    def test_slot_generalizes_to_wildcard(self):
        got = generalize_contexts(
            RuleContext(True, frozenset("fy"), "ish"), RuleContext(False, None, "reddish")
        )
        assert got == RuleContext(True, ANY, "ish")


class TestConfidence:
    def test_hand_derived_example(self):
        m = train([("selfish", N, 1.0), ("boyish", N, 1.0)])
        target = [r for r in m.rules if r.context == RuleContext(True, frozenset("fy"), "ish")]
        assert len(target) == 1
        r = target[0]
        assert r.hits == 2 and r.scope == 2 and r.reliability == 1.0
        assert r.confidence == pytest.approx(0.655, abs=1e-3)

    def test_confidence_monotone_in_scope(self):
        z = z_for_alpha(0.75)
        assert adjusted_confidence(100, 100, z) > adjusted_confidence(2, 2, z)

    @settings(max_examples=300)
    @given(
        st.floats(0.05, 1.0),
        st.floats(0.5, 500.0),
        st.floats(1.01, 20.0),
    )
    def test_monotonicity_property(self, reliability, scope, k):
        z = z_for_alpha(0.75)
        hits = reliability * scope
        assert adjusted_confidence(hits * k, scope * k, z) > adjusted_confidence(
            hits, scope, z
        )

    @settings(max_examples=300)
    @given(st.floats(0.01, 1.0), st.floats(0.5, 1000.0))
    def test_confidence_below_reliability(self, reliability, scope):
        z = z_for_alpha(0.75)
        hits = reliability * scope
        assert adjusted_confidence(hits, scope, z) < reliability

    def test_alpha_override(self):
        assert z_for_alpha(0.75) == pytest.approx(0.6745, abs=1e-4)
        assert z_for_alpha(0.9) == pytest.approx(1.2816, abs=1e-3)
        with pytest.raises(InputError):
            z_for_alpha(0.4)


# ---------------------------------------------------------------------------
# Closure oracle: train() must reproduce the fixpoint of pairwise minimal
# generalization computed the slow way, including hits/scope bookkeeping.
# ---------------------------------------------------------------------------


def brute_force_rules(items):
    contexts_by_output = {}
    for form, choice, _w in items:
        contexts_by_output.setdefault(choice, set()).add(RuleContext(False, None, form))
    out = {}
    for choice, contexts in contexts_by_output.items():
        universe = set(contexts)
        while True:
            new = set()
            for c1, c2 in itertools.combinations(universe, 2):
                g = generalize_contexts(c1, c2)
                if g is not None and g not in universe:
                    new.add(g)
            if not new:
                break
            universe |= new
        out[choice] = universe
    rules = {}
    for choice, universe in out.items():
        for ctx in universe:
            scope = sum(w for form, _c, w in items if ctx.matches(form))
            hits = sum(w for form, c, w in items if c is choice and ctx.matches(form))
            rules[(choice, ctx)] = (hits, scope)
    return rules


words_strategy = st.lists(
    st.tuples(
        st.text(alphabet="abc", min_size=1, max_size=6),
        st.sampled_from([I, N]),
    ),
    min_size=1,
    max_size=8,
)


@settings(max_examples=60, deadline=None)
@given(words_strategy)
def test_train_matches_brute_force_closure(pairs):
    items = [(form, choice, 1.0) for form, choice in pairs]
    model = train(items, mode=Mode.TYPE)
    got = {(r.output, r.context): (r.hits, r.scope) for r in model.rules}
    want = brute_force_rules(items)
    assert got == want


def test_train_matches_brute_force_with_weights():
    items = [
        ("ishaa", I, 3.0),
        ("ishab", N, 1.0),
        ("oshab", N, 5.0),
        ("ab", N, 2.0),
        ("bb", I, 4.0),
    ]
    mean_w = sum(w for *_x, w in items) / len(items)
    normalized = [(f, c, w / mean_w) for f, c, w in items]
    model = train(items, mode=Mode.TOKEN)
    got = {(r.output, r.context): (r.hits, r.scope) for r in model.rules}
    want = brute_force_rules(normalized)
    assert set(got) == set(want)
    for key, (hits, scope) in want.items():
        assert got[key][0] == pytest.approx(hits, abs=1e-12)
        assert got[key][1] == pytest.approx(scope, abs=1e-12)


class TestTrainPredict:
    def test_empty_training_rejected(self):
        with pytest.raises(InputError):
            train([])

    def test_every_training_item_covered(self):
        items = [("selfish", N, 1.0), ("boyish", N, 1.0), ("available", I, 1.0)]
        model = train(items)
        for form, choice, _ in items:
            pred = predict(model, form)
            assert pred.choice is choice

    def test_no_coverage_error(self):
        model = train([("selfish", N, 1.0), ("boyish", N, 1.0)])
        with pytest.raises(NoCoverageError):
            predict(model, "zzzzz")

    def test_type_mode_ignores_counts(self):
        items1 = [("selfish", N, 10.0), ("boyish", N, 1.0), ("available", I, 7.0)]
        items2 = [(f, c, w * 100) for f, c, w in items1]
        m1 = train(items1, mode=Mode.TYPE)
        m2 = train(items2, mode=Mode.TYPE)
        assert [r.render() for r in m1.rules] == [r.render() for r in m2.rules]

    def test_token_mode_scale_invariant(self):
        items1 = [("selfish", N, 10.0), ("boyish", N, 2.0), ("bavyish", I, 5.0)]
        items2 = [(f, c, w * 37.5) for f, c, w in items1]
        m1 = train(items1, mode=Mode.TOKEN)
        m2 = train(items2, mode=Mode.TOKEN)
        assert [r.render() for r in m1.rules] == [r.render() for r in m2.rules]
        for q in ("badyish", "selfish", "warmish"):
            assert predict(m1, q).choice is predict(m2, q).choice

    def test_tie_break_is_deterministic(self):
        # mirror-image evidence: both wildcard rules tie on confidence and
        # scope, so the ITY < NESS order decides
        items = [("aaish", I, 1.0), ("abish", I, 1.0), ("adish", N, 1.0), ("aeish", N, 1.0)]
        model = train(items)
        pred = predict(model, "acish")
        assert pred.best[I] == pred.best[N]
        assert pred.choice is I

    def test_prediction_reports_per_choice_maxima(self):
        items = [("selfish", N, 1.0), ("boyish", N, 1.0), ("available", I, 1.0)]
        model = train(items)
        pred = predict(model, "badyish")
        assert pred.best[N] is not None and pred.best[N] > 0
        assert pred.best[I] is None

    def test_serialization_round_trip(self, tmp_path):
        items = [("selfish", N, 3.0), ("boyish", N, 1.0), ("available", I, 2.0)]
        model = train(items, mode=Mode.TOKEN, alpha=0.75)
        path = tmp_path / "rules.tsv"
        model.save(path)
        loaded = MglModel.load(path)
        assert loaded.mode == Mode.TOKEN
        assert [r.render() for r in loaded.rules] == [r.render() for r in model.rules]
        assert predict(loaded, "badyish").choice is predict(model, "badyish").choice
