import pytest

from ityness.corpus import FrequencyTable, count_corpus
from ityness.errors import GenerationError, InputError
from ityness.morphlex import AdjectiveClass, SuffixChoice, apply_suffix
from ityness.noncegen import (
    BOS,
    EOS,
    BigramModel,
    NonceSpec,
    generate,
    load_nonces,
    save_nonces,
    train_bigrams,
)


class TestTrainBigrams:
    def test_repeated_word_counts(self):
        model, modal = train_bigrams(["ab", "ab"])
        assert model.counts == {(BOS, "a"): 2, ("a", "b"): 2, ("b", EOS): 2}
        assert modal == (2, 2)

    def test_modal_lengths_tie_toward_shorter(self):
        _, modal = train_bigrams(["abc", "abd", "wxyz"])
        assert modal == (3, 4)
        _, modal = train_bigrams(["ab", "cd", "efg", "hij"])
        # tie between lengths 2 and 3: both kept, shorter first
        assert modal == (2, 3)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            train_bigrams([])


def make_training(cls=AdjectiveClass.ISH):
    words = [
        "selfish", "boyish", "girlish", "foolish", "stylish", "bookish",
        "reddish", "greenish", "warmish", "coldish", "dampish", "softish",
        "loutish", "oafish", "wolfish", "owlish", "babyish", "dollish",
    ]
    assert all(w.endswith(cls.suffix) for w in words)
    return words


class TestGenerate:
    def setup_method(self):
        self.words = make_training()
        self.model, self.modal = train_bigrams(self.words)
        self.freq = count_corpus([" ".join(self.words)])

    def spec(self, **kw):
        args = dict(
            cls=AdjectiveClass.ISH,
            lengths=self.modal,
            per_length=10,
            seed=7,
            max_attempts=100_000,
        )
        args.update(kw)
        return NonceSpec(**args)

    def test_constraints_hold_for_all_outputs(self):
        out = generate(self.model, self.spec(), self.freq, set(self.words))
        assert len(out) == 20
        lengths = sorted({len(b.form) for b in out})
        assert lengths == sorted(set(self.modal))
        for b in out:
            assert b.form.endswith("ish")
            assert self.model.closed_over(b.form)
            assert self.freq[b.form] == 0
            assert self.freq[apply_suffix(b, SuffixChoice.ITY)] == 0
            assert self.freq[apply_suffix(b, SuffixChoice.NESS)] == 0
            assert b.form not in self.words
        assert len({b.form for b in out}) == len(out)

    def test_deterministic_given_seed(self):
        runs = [
            [b.form for b in generate(self.model, self.spec(), self.freq, set(self.words))]
            for _ in range(3)
        ]
        assert runs[0] == runs[1] == runs[2]

    def test_different_seeds_differ(self):
        a = [b.form for b in generate(self.model, self.spec(seed=1), self.freq)]
        b = [b.form for b in generate(self.model, self.spec(seed=2), self.freq)]
        assert a != b

    def test_quota_failure_reports_shortfall(self):
        # two training words admit only a couple of distinct outputs
        model, modal = train_bigrams(["selfish", "serfish"])
        freq = count_corpus(["selfish serfish"])
        with pytest.raises(GenerationError) as exc:
            generate(
                model,
                NonceSpec(AdjectiveClass.ISH, modal, per_length=10, seed=1, max_attempts=2000),
                freq,
                {"selfish", "serfish"},
            )
        assert exc.value.shortfall

    def test_wrong_class_model_rejected(self):
        with pytest.raises(InputError):
            generate(
                self.model,
                NonceSpec(AdjectiveClass.OUS, (7, 8), per_length=2, seed=1),
                self.freq,
            )

    def test_spec_length_validation(self):
        with pytest.raises(InputError):
            NonceSpec(AdjectiveClass.ABLE, (5, 10), per_length=1, seed=0)


def test_nonce_tsv_round_trip(tmp_path):
    words = make_training()
    model, modal = train_bigrams(words)
    freq = count_corpus([" ".join(words)])
    out = generate(
        model,
        NonceSpec(AdjectiveClass.ISH, modal, per_length=5, seed=3),
        freq,
        set(words),
    )
    path = tmp_path / "nonce.tsv"
    save_nonces(out, path)
    assert load_nonces(path) == out
