"""Pseudo-English stem generation with exact length control."""

from __future__ import annotations

import random

ONSETS = [
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t",
    "v", "w", "z", "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gl", "gr",
    "pl", "pr", "sc", "sh", "sk", "sl", "sm", "sn", "sp", "st", "sw", "th", "tr",
]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "ee", "oa", "ou", "oo", "ie"]
CODAS = [
    "", "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "x",
    "ck", "ct", "ld", "ll", "lt", "mp", "nd", "ng", "nk", "nt", "pt", "rd",
    "rk", "rm", "rn", "rt", "sk", "sp", "ss", "st",
]


def make_stem(rng: random.Random, length: int) -> str:
    """One pronounceable stem of exactly the requested length."""
    for _ in range(200):
        parts = []
        while sum(len(p) for p in parts) < length + 2:
            parts.append(rng.choice(ONSETS))
            parts.append(rng.choice(VOWELS))
            if rng.random() < 0.55:
                parts.append(rng.choice(CODAS))
        s = "".join(parts)
        if len(s) >= length:
            s = s[:length]
            if s[-1] not in "aeiou" or rng.random() < 0.4:
                return s
    return s[:length]


class FormFactory:
    """Generates unique base forms, respecting a global exclusion set."""

    def __init__(self, seed: int, excluded: set[str]):
        self.rng = random.Random(seed)
        self.used: set[str] = set(excluded)

    def claim(self, form: str) -> str:
        if form in self.used:
            raise ValueError(f"form collision: {form!r}")
        self.used.add(form)
        return form

    def fresh(self, suffix: str, length: int, predicate=None) -> str:
        free = length - len(suffix)
        if free < 2:
            raise ValueError(f"length {length} too short for -{suffix}")
        for _ in range(100_000):
            form = make_stem(self.rng, free) + suffix
            if form in self.used:
                continue
            if predicate is not None and not predicate(form):
                continue
            self.used.add(form)
            return form
        raise RuntimeError(f"cannot generate fresh -{suffix} form of length {length}")

    def fresh_with_tail(self, tail: str, length: int, predicate=None) -> str:
        """A fresh form that ends with the given tail."""
        free = length - len(tail)
        if free < 1:
            raise ValueError(f"length {length} too short for tail {tail!r}")
        for _ in range(100_000):
            form = make_stem(self.rng, free) + tail
            if form in self.used:
                continue
            if predicate is not None and not predicate(form):
                continue
            self.used.add(form)
            return form
        raise RuntimeError(f"cannot generate fresh form with tail {tail!r}")
