"""Streaming corpus frequency counting and base/derivative lexicon extraction."""

from __future__ import annotations

import concurrent.futures
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InputError
from .ioutil import open_read as _open_read, open_write as _open_write
from .morphlex import AdjectiveClass, Base, SuffixChoice, apply_suffix, strip_suffix

WORD_RE = re.compile(r"[A-Za-z]+")

# Extraction heuristics: the base itself must occur, must classify into one
# of the ten classes, and must be at least this long.
MIN_BASE_LENGTH = 5


class FrequencyTable:
    """Word -> token count. Merging tables is pointwise sum."""

    __slots__ = ("counts",)

    def __init__(self, counts: Optional[Counter] = None):
        self.counts = counts if counts is not None else Counter()

    def __getitem__(self, word: str) -> int:
        return self.counts.get(word, 0)

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, word: str) -> bool:
        return self.counts.get(word, 0) > 0

    @property
    def total_tokens(self) -> int:
        return sum(self.counts.values())

    def add(self, word: str, n: int = 1) -> None:
        self.counts[word] += n

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return FrequencyTable(merged)

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        return self.merge(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return {w: c for w, c in self.counts.items() if c} == {
            w: c for w, c in other.counts.items() if c
        }

    def save(self, path) -> None:
        with _open_write(path) as fh:
            for word in sorted(self.counts):
                c = self.counts[word]
                if c:
                    fh.write(f"{word}\t{c}\n")

    @classmethod
    def load(cls, path) -> "FrequencyTable":
        counts = Counter()
        with _open_read(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    word, n = line.split("\t")
                    counts[word] += int(n)
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: bad frequency row {line!r}") from exc
        return cls(counts)


def count_corpus(lines: Iterable[str]) -> FrequencyTable:
    """Count maximal ASCII-letter runs, lowercased, over a text stream."""
    counts = Counter()
    findall = WORD_RE.findall
    for line in lines:
        for word in findall(line):
            counts[word.lower()] += 1
    return FrequencyTable(counts)


def _iter_text(path, fmt: str):
    if fmt == "auto":
        name = str(path)
        if name.endswith(".gz"):
            name = name[:-3]
        fmt = "jsonl" if name.endswith((".jsonl", ".ndjson")) else "text"
    with _open_read(path) as fh:
        if fmt == "text":
            yield from fh
        else:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)["text"]
                except (json.JSONDecodeError, KeyError) as exc:
                    raise InputError(f"{path}:{lineno}: bad JSONL record") from exc


def count_file(path, fmt: str = "auto") -> FrequencyTable:
    """Count one corpus shard. Errors carry the file position."""
    try:
        return count_corpus(_iter_text(path, fmt))
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc


def count_paths(paths, fmt: str = "auto", threads: int = 1) -> FrequencyTable:
    """Count many shards, in parallel if asked, and merge. Order-independent."""
    paths = list(paths)
    if threads > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as ex:
            tables = list(ex.map(count_file, paths, [fmt] * len(paths)))
    else:
        tables = [count_file(p, fmt) for p in paths]
    merged = Counter()
    for t in tables:
        merged.update(t.counts)
    return FrequencyTable(merged)


@dataclass(frozen=True, slots=True)
class LexiconEntry:
    """A base adjective with token counts for itself and both derivatives."""

    base: Base
    base_count: int
    ity_count: int
    ness_count: int

    def count(self, choice: SuffixChoice) -> int:
        return self.ity_count if choice is SuffixChoice.ITY else self.ness_count

    @property
    def preferred(self) -> SuffixChoice:
        """Derivative with the higher count; ties go to ITY."""
        return SuffixChoice.NESS if self.ness_count > self.ity_count else SuffixChoice.ITY

    @property
    def attested_only(self) -> Optional[SuffixChoice]:
        """The single attested choice, or None when both or neither occur."""
        has_ity, has_ness = self.ity_count > 0, self.ness_count > 0
        if has_ity == has_ness:
            return None
        return SuffixChoice.ITY if has_ity else SuffixChoice.NESS


def extract_lexicon(freq: FrequencyTable) -> list[LexiconEntry]:
    """Collect every -ity/-ness derivative whose base also occurs.

    No frequency threshold is applied to the derivative; filters are: the
    word is purely alphabetic, the base occurs at least once, classifies
    into one of the ten classes, and is at least MIN_BASE_LENGTH long.
    """
    found: dict[str, dict[SuffixChoice, int]] = {}
    bases: dict[str, Base] = {}
    for word, n in freq.counts.items():
        if n <= 0 or not (word.endswith("ity") or word.endswith("ness")):
            continue
        if not (word.isascii() and word.isalpha() and word.islower()):
            continue
        hit = strip_suffix(word)
        if hit is None:
            continue
        base, choice = hit
        if len(base.form) < MIN_BASE_LENGTH or freq[base.form] < 1:
            continue
        bases[base.form] = base
        found.setdefault(base.form, {})[choice] = (
            found.get(base.form, {}).get(choice, 0) + n
        )
    entries = []
    for form in sorted(found):
        counts = found[form]
        entries.append(
            LexiconEntry(
                base=bases[form],
                base_count=freq[form],
                ity_count=counts.get(SuffixChoice.ITY, 0),
                ness_count=counts.get(SuffixChoice.NESS, 0),
            )
        )
    return entries


def save_lexicon(entries: Iterable[LexiconEntry], path) -> None:
    with _open_write(path) as fh:
        fh.write("base\tclass\tbase_count\tity_count\tness_count\n")
        for e in entries:
            fh.write(
                f"{e.base.form}\t{e.base.cls.label}\t{e.base_count}"
                f"\t{e.ity_count}\t{e.ness_count}\n"
            )


def load_lexicon(path) -> list[LexiconEntry]:
    entries = []
    with _open_read(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["base", "class", "base_count", "ity_count", "ness_count"]:
            raise InputError(f"{path}: unexpected lexicon header {header}")
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                form, cls, bc, ic, nc = line.split("\t")
                entries.append(
                    LexiconEntry(
                        base=Base(form, AdjectiveClass.parse(cls)),
                        base_count=int(bc),
                        ity_count=int(ic),
                        ness_count=int(nc),
                    )
                )
            except (ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad lexicon row {line!r}") from exc
    return entries


@dataclass(frozen=True)
class ChoiceStats:
    types: int
    mean_tokens: float
    hapaxes: int
    trimmed_mean: float


@dataclass(frozen=True)
class ClassStats:
    """Per-class, per-choice derivative statistics of a lexicon."""

    per_class: dict[AdjectiveClass, dict[SuffixChoice, ChoiceStats]] = field(
        default_factory=dict
    )

    def to_csv(self, path) -> None:
        with _open_write(path) as fh:
            fh.write(
                "class,ity_types,ness_types,ity_mean_tokens,ness_mean_tokens,"
                "ity_hapaxes,ness_hapaxes,ity_trimmed_mean,ness_trimmed_mean\n"
            )
            for cls in AdjectiveClass:
                row = self.per_class[cls]
                i, n = row[SuffixChoice.ITY], row[SuffixChoice.NESS]
                fh.write(
                    f"{cls.label},{i.types},{n.types},{i.mean_tokens:.1f},"
                    f"{n.mean_tokens:.1f},{i.hapaxes},{n.hapaxes},"
                    f"{i.trimmed_mean:.1f},{n.trimmed_mean:.1f}\n"
                )


def trim_top_count(n_types: int, share: float = 0.05) -> int:
    """Number of highest-count types dropped by the trimmed mean (half-up)."""
    return int(n_types * share + 0.5)


def class_stats(entries: Iterable[LexiconEntry]) -> ClassStats:
    """Type counts, mean token counts, hapaxes, and top-5%-trimmed means."""
    entries = list(entries)
    if not entries:
        raise InputError("class_stats needs a non-empty lexicon")
    per_class: dict[AdjectiveClass, dict[SuffixChoice, ChoiceStats]] = {}
    for cls in AdjectiveClass:
        per_class[cls] = {}
        for choice in SuffixChoice:
            counts = sorted(
                e.count(choice) for e in entries if e.base.cls is cls and e.count(choice) > 0
            )
            types = len(counts)
            if types == 0:
                per_class[cls][choice] = ChoiceStats(0, 0.0, 0, 0.0)
                continue
            mean = sum(counts) / types
            hapaxes = sum(1 for c in counts if c == 1)
            k = trim_top_count(types)
            kept = counts[: types - k] if k else counts
            trimmed = sum(kept) / len(kept) if kept else 0.0
            per_class[cls][choice] = ChoiceStats(types, mean, hapaxes, trimmed)
    return ClassStats(per_class)


def lexicon_frequency_table(entries: Iterable[LexiconEntry]) -> FrequencyTable:
    """Frequency table of all bases and derivatives in a lexicon."""
    counts = Counter()
    for e in entries:
        counts[e.base.form] += e.base_count
        if e.ity_count:
            counts[apply_suffix(e.base, SuffixChoice.ITY)] += e.ity_count
        if e.ness_count:
            counts[apply_suffix(e.base, SuffixChoice.NESS)] += e.ness_count
    return FrequencyTable(counts)
