"""Adjective classes, -ity/-ness suffixation, and affix-stripping parses.

The domain vocabulary for everything else in the package: the ten adjective
classes that nominalize with -ity or -ness, the morpho-orthographic rules
for attaching either suffix, the inverse stripping used for corpus
extraction, and a depth-bounded affix-stripping parser that decides whether
an arbitrary word is morphologically complex.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional

from .errors import InputError

VOWELS = frozenset("aeiou")
CONSONANTS = frozenset("bcdfghjklmnpqrstvwxyz")


class SuffixChoice(enum.IntEnum):
    """The two competing nominalizers. ITY < NESS fixes all tie-breaking."""

    ITY = 0
    NESS = 1

    @property
    def suffix(self) -> str:
        return "ity" if self is SuffixChoice.ITY else "ness"

    @classmethod
    def parse(cls, text: str) -> "SuffixChoice":
        t = text.strip().lstrip("-").lower()
        if t == "ity":
            return cls.ITY
        if t == "ness":
            return cls.NESS
        raise InputError(f"not a suffix choice: {text!r}")

    def __str__(self) -> str:
        return self.suffix


class Group(enum.Enum):
    """Regularity groups: (almost) regular vs. variable, per preferred suffix."""

    R_NESS = "r-ness"
    R_ITY = "r-ity"
    V_NESS = "v-ness"
    V_ITY = "v-ity"


class AdjectiveClass(enum.Enum):
    """The ten adjective-final suffixes whose bases take -ity or -ness."""

    ABLE = ("able", Group.R_ITY)
    AL = ("al", Group.R_ITY)
    AR = ("ar", Group.R_ITY)
    ED = ("ed", Group.R_NESS)
    IC = ("ic", Group.R_ITY)
    ING = ("ing", Group.R_NESS)
    ISH = ("ish", Group.R_NESS)
    IVE = ("ive", Group.V_ITY)
    LESS = ("less", Group.R_NESS)
    OUS = ("ous", Group.V_NESS)

    def __init__(self, suffix: str, group: Group):
        self.suffix = suffix
        self.group = group

    @property
    def label(self) -> str:
        return "-" + self.suffix

    @classmethod
    def parse(cls, text: str) -> "AdjectiveClass":
        t = text.strip().lstrip("-").lower()
        for c in cls:
            if c.suffix == t:
                return c
        raise InputError(f"not an adjective class: {text!r}")

    def __str__(self) -> str:
        return self.label


# Longest suffix wins; order fixed so classify() is deterministic.
_CLASSES_BY_LENGTH = sorted(AdjectiveClass, key=lambda c: (-len(c.suffix), c.suffix))


def classify(form: str) -> Optional[AdjectiveClass]:
    """Return the adjective class whose suffix is the longest match, if any."""
    for cls in _CLASSES_BY_LENGTH:
        if form.endswith(cls.suffix):
            return cls
    return None


@dataclass(frozen=True, slots=True)
class Base:
    """A base adjective together with its class."""

    form: str
    cls: AdjectiveClass

    def __post_init__(self):
        if not self.form.isascii() or not self.form.isalpha() or not self.form.islower():
            raise InputError(f"base form must be lowercase alphabetic: {self.form!r}")
        if not self.form.endswith(self.cls.suffix):
            raise InputError(f"{self.form!r} does not end in {self.cls.label}")
        if len(self.form) < len(self.cls.suffix) + 2:
            raise InputError(f"{self.form!r} too short for class {self.cls.label}")

    @classmethod
    def from_form(cls, form: str) -> "Base":
        c = classify(form)
        if c is None:
            raise InputError(f"{form!r} does not end in any of the ten class suffixes")
        return cls(form, c)

    def __str__(self) -> str:
        return self.form


def apply_suffix(base: Base, choice: SuffixChoice) -> str:
    """Attach -ity or -ness to a base, applying morpho-orthographic changes.

    -ness attaches by plain concatenation for every class. -ity has three
    class-specific adjustments (-able -> -ability, -ive drops the final e,
    -ous -> -osity); the remaining classes concatenate.
    """
    form = base.form
    if choice is SuffixChoice.NESS:
        return form + "ness"
    cls = base.cls
    if cls is AdjectiveClass.ABLE:
        return form[:-4] + "ability"
    if cls is AdjectiveClass.IVE:
        return form[:-1] + "ity"
    if cls is AdjectiveClass.OUS:
        return form[:-3] + "osity"
    return form + "ity"


@dataclass(frozen=True, slots=True)
class DerivativePair:
    """A (base, suffix choice) pair with its derivative string and count."""

    base: Base
    choice: SuffixChoice
    derivative: str
    token_count: int = 0

    def __post_init__(self):
        if self.derivative != apply_suffix(self.base, self.choice):
            raise InputError(
                f"derivative {self.derivative!r} does not match "
                f"{self.base.form!r} + {self.choice.suffix}"
            )
        if self.token_count < 0:
            raise InputError("token_count must be non-negative")

    @classmethod
    def build(cls, base: Base, choice: SuffixChoice, token_count: int = 0) -> "DerivativePair":
        return cls(base, choice, apply_suffix(base, choice), token_count)


def _candidate_bases(word: str) -> Iterable[tuple[str, SuffixChoice]]:
    # Longest pattern first so e.g. "...ability" is tried before plain "...ity".
    if word.endswith("ness"):
        yield word[:-4], SuffixChoice.NESS
        return
    if word.endswith("ability"):
        yield word[:-7] + "able", SuffixChoice.ITY
    if word.endswith("osity"):
        yield word[:-5] + "ous", SuffixChoice.ITY
    if word.endswith("ivity"):
        yield word[:-3] + "e", SuffixChoice.ITY
    if word.endswith("ity"):
        yield word[:-3], SuffixChoice.ITY


def strip_suffix(word: str) -> Optional[tuple[Base, SuffixChoice]]:
    """Inverse of apply_suffix: recover (base, choice) or None.

    A candidate split only counts if re-applying the suffix reproduces the
    word exactly, so the result always round-trips.
    """
    for form, choice in _candidate_bases(word):
        cls = classify(form)
        if cls is None or len(form) < len(cls.suffix) + 2:
            continue
        if not (form.isascii() and form.isalpha() and form.islower()):
            continue
        base = Base(form, cls)
        if apply_suffix(base, choice) == word:
            return base, choice
    return None


# ---------------------------------------------------------------------------
# Affix-stripping parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffixInventory:
    """Prefix/suffix lists plus the reference stem list used by parse_word."""

    prefixes: frozenset[str]
    suffixes: frozenset[str]
    stems: frozenset[str]

    @classmethod
    def load(cls, prefix_path, suffix_path, stems_path) -> "AffixInventory":
        def read(path):
            with open(path, encoding="utf-8") as fh:
                return frozenset(w.strip().lower() for w in fh if w.strip())

        return cls(read(prefix_path), read(suffix_path), read(stems_path))

    @classmethod
    def bundled(cls) -> "AffixInventory":
        return _bundled_inventory()


@lru_cache(maxsize=1)
def _bundled_inventory() -> AffixInventory:
    pkg = resources.files("ityness.data")

    def read(name):
        return frozenset(
            w.strip().lower()
            for w in pkg.joinpath(name).read_text(encoding="utf-8").splitlines()
            if w.strip()
        )

    return AffixInventory(read("prefixes.txt"), read("suffixes.txt"), read("stems.txt"))


@dataclass(frozen=True)
class Parse:
    """Outcome of affix stripping. Complex iff a stem was found."""

    word: str
    stem: Optional[str]
    affix_sequence: tuple[str, ...]
    is_complex: bool


def attach_variants(stem: str, suffix: str) -> list[str]:
    """Orthographically plausible spellings of stem + suffix.

    Covers silent-e deletion, consonant doubling, and the y/i alternation;
    plain concatenation is always a variant.
    """
    out = [stem + suffix]
    if not stem or not suffix:
        return out
    first = suffix[0]
    if first in VOWELS and stem[-1] == "e":
        out.append(stem[:-1] + suffix)
    if (
        first in VOWELS
        and len(stem) >= 3
        and stem[-1] in CONSONANTS
        and stem[-1] not in "wxy"
        and stem[-2] in VOWELS
        and stem[-3] in CONSONANTS
    ):
        out.append(stem + stem[-1] + suffix)
    if first != "i" and len(stem) >= 2 and stem[-1] == "y" and stem[-2] in CONSONANTS:
        out.append(stem[:-1] + "i" + suffix)
    return out


def _detach_candidates(chunk: str, suffix: str) -> list[str]:
    """Residues r such that some attach variant of (r, suffix) equals chunk."""
    if not chunk.endswith(suffix):
        return []
    r = chunk[: -len(suffix)]
    if not r:
        return []
    seen = []
    for cand in (r, r + "e", (r[:-1] + "y") if r.endswith("i") else None,
                 r[:-1] if len(r) >= 2 and r[-1] == r[-2] and r[-1] in CONSONANTS else None):
        if cand and cand not in seen and chunk in attach_variants(cand, suffix):
            seen.append(cand)
    return seen


def rederivations(stem: str, affixes: Iterable[str]) -> set[str]:
    """All spellings reachable by re-attaching the affix sequence to the stem."""
    forms = {stem}
    for affix in affixes:
        nxt = set()
        for f in forms:
            if affix.endswith("-"):
                nxt.add(affix[:-1] + f)
            else:
                nxt.update(attach_variants(f, affix.lstrip("-")))
        forms = nxt
    return forms


def parse_word(word: str, inventory: AffixInventory, max_depth: int = 3) -> Parse:
    """Depth-first affix stripping with morpho-orthographic reversal.

    Prefixes strip from the left, suffixes from the right, in any
    combination up to max_depth. A word is complex iff some residue of at
    least one stripped affix is a known stem of length >= 3. The affix
    sequence is returned in attachment order (innermost first), prefixes
    marked "pre-" style and suffixes "-ness" style.
    """
    if not (word.isascii() and word.isalpha() and word.islower()):
        raise InputError(f"parse_word expects a lowercase alphabetic word: {word!r}")

    prefixes = sorted(inventory.prefixes, key=lambda a: (-len(a), a))
    suffixes = sorted(inventory.suffixes, key=lambda a: (-len(a), a))

    def dfs(residue: str, depth: int, stripped: tuple[str, ...]):
        if depth > 0 and residue != word and len(residue) >= 3 and residue in inventory.stems:
            return residue, stripped
        if depth >= max_depth or len(residue) <= 3:
            return None
        for pre in prefixes:
            if len(residue) - len(pre) >= 3 and residue.startswith(pre):
                hit = dfs(residue[len(pre):], depth + 1, (pre + "-",) + stripped)
                if hit:
                    return hit
        for suf in suffixes:
            if len(residue) - len(suf) < 3:
                continue
            for cand in _detach_candidates(residue, suf):
                hit = dfs(cand, depth + 1, ("-" + suf,) + stripped)
                if hit:
                    return hit
        return None

    found = dfs(word, 0, ())
    if found is None:
        return Parse(word, None, (), False)
    stem, stripped = found
    return Parse(word, stem, stripped, True)
