"""Character-bigram pseudoword generation constrained to a class suffix.

Trains a boundary-augmented bigram chain on an input word list (all ending
in the target suffix), then samples nonce forms of the two most frequent
training lengths, fixing the suffix characters and rejecting anything that
is attested in the corpus, collides with a known word, or whose -ity/-ness
derivatives are attested.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import FrequencyTable
from .errors import GenerationError, InputError
from .morphlex import AdjectiveClass, Base, SuffixChoice, apply_suffix

BOS = "^"
EOS = "$"


class BigramModel:
    """Transition counts over adjacent character pairs, with word boundaries."""

    __slots__ = ("counts", "alphabet", "_succ")

    def __init__(self, counts: dict[tuple[str, str], int], alphabet: frozenset[str]):
        self.counts = dict(counts)
        self.alphabet = frozenset(alphabet)
        succ: dict[str, list[tuple[str, int]]] = {}
        for (a, b), n in sorted(self.counts.items()):
            if b != EOS:
                succ.setdefault(a, []).append((b, n))
        self._succ = succ

    def has(self, a: str, b: str) -> bool:
        return (a, b) in self.counts

    def successors(self, a: str) -> list[tuple[str, int]]:
        """Letter successors of a (boundary EOS excluded), sorted for determinism."""
        return self._succ.get(a, [])

    def closed_over(self, word: str) -> bool:
        """True iff every adjacent pair of ^word$ was seen in training."""
        chars = [BOS, *word, EOS]
        return all(self.has(a, b) for a, b in zip(chars, chars[1:]))


def train_bigrams(words: Sequence[str]) -> tuple[BigramModel, tuple[int, int]]:
    """Count boundary-augmented bigrams; also report the two modal lengths.

    Length ties break toward the shorter length.
    """
    words = list(words)
    if not words:
        raise InputError("train_bigrams needs a non-empty word list")
    counts: Counter = Counter()
    lengths: Counter = Counter()
    alphabet = set()
    for w in words:
        chars = [BOS, *w, EOS]
        for a, b in zip(chars, chars[1:]):
            counts[(a, b)] += 1
        lengths[len(w)] += 1
        alphabet.update(w)
    by_freq = sorted(lengths.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(by_freq) == 1:
        modal = (by_freq[0][0], by_freq[0][0])
    else:
        modal = (by_freq[0][0], by_freq[1][0])
    return BigramModel(dict(counts), frozenset(alphabet)), modal


@dataclass(frozen=True)
class NonceSpec:
    """What to generate: class, the two lengths, count per length, seed."""

    cls: AdjectiveClass
    lengths: tuple[int, int]
    per_length: int = 25
    seed: int = 0
    max_attempts: int = 100_000

    def __post_init__(self):
        for length in self.lengths:
            if length < len(self.cls.suffix) + 2:
                raise InputError(
                    f"length {length} too short for class {self.cls.label}"
                )


def _rng_for(spec: NonceSpec, length: int) -> random.Random:
    # integer-only derivation keeps seeding stable across platforms
    class_index = list(AdjectiveClass).index(spec.cls)
    return random.Random(spec.seed * 1_000_003 + class_index * 1_009 + length)


def generate(
    model: BigramModel,
    spec: NonceSpec,
    freq: FrequencyTable,
    known: Optional[set] = None,
) -> list[Base]:
    """Sample nonce bases for the spec, deterministic given the seed.

    Every output has the requested length, ends in the class suffix, is
    bigram-closed over the model, is absent from the corpus along with both
    of its derivatives, and is distinct from `known` and from the other
    outputs.
    """
    known = known or set()
    suffix = spec.cls.suffix
    for a, b in zip(suffix, suffix[1:]):
        if not model.has(a, b):
            raise InputError(f"model was not trained on {spec.cls.label} words")
    out: list[Base] = []
    seen: set[str] = set()
    shortfall: dict[int, int] = {}
    for length in spec.lengths:
        rng = _rng_for(spec, length)
        free = length - len(suffix)
        produced = 0
        attempts = 0
        while produced < spec.per_length and attempts < spec.max_attempts:
            attempts += 1
            word = _sample_word(model, rng, free, suffix)
            if word is None or word in seen or word in known:
                continue
            if not model.closed_over(word):
                continue
            base = Base(word, spec.cls)
            if freq[word] != 0:
                continue
            if freq[apply_suffix(base, SuffixChoice.ITY)] != 0:
                continue
            if freq[apply_suffix(base, SuffixChoice.NESS)] != 0:
                continue
            seen.add(word)
            out.append(base)
            produced += 1
        if produced < spec.per_length:
            shortfall[length] = spec.per_length - produced
    if shortfall:
        raise GenerationError(
            f"quota not met for {spec.cls.label}: short by "
            + ", ".join(f"{v} at length {k}" for k, v in sorted(shortfall.items())),
            shortfall=shortfall,
        )
    return out


def _sample_word(model: BigramModel, rng: random.Random, free: int, suffix: str):
    """One left-to-right draw of the free prefix; None on a dead end."""
    prev = BOS
    chars = []
    for _ in range(free):
        succ = model.successors(prev)
        if not succ:
            return None
        letters = [c for c, _ in succ]
        weights = [n for _, n in succ]
        prev = rng.choices(letters, weights=weights, k=1)[0]
        chars.append(prev)
    if not model.has(prev, suffix[0]):
        return None
    return "".join(chars) + suffix


def save_nonces(bases: Iterable[Base], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for b in bases:
            fh.write(f"{b.form}\t{b.cls.label}\n")


def load_nonces(path) -> list[Base]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                form, cls = line.split("\t")
                out.append(Base(form, AdjectiveClass.parse(cls)))
            except (ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad nonce row {line!r}") from exc
    return out
