"""Probe-record ingestion and every comparison statistic of the workbench.

Takes LM probe outputs (log-probabilities of the two competing derivatives),
human annotations, forced-choice preferences, and vocabulary-test records,
and computes winner ratios, accuracy tables with prompt averaging, the
frequency-bucket confidence analysis, the entropy correlation, human
agreement, and the familiarity regressions.
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import LexiconEntry
from .errors import InputError, UndefinedStatisticError
from .ioutil import open_read, open_write
from .morphlex import AdjectiveClass, Base, SuffixChoice, classify
from .stats import (
    RatingMatrix,
    holm_bonferroni,
    ols,
    pearson_r,
    shannon_entropy,
    welch_t,
)

log = logging.getLogger(__name__)

LOW_BUCKET = (0, 10)       # attested count f in (0, 10]
HIGH_BUCKET = (100, None)  # attested count f in (100, inf)
LN10 = math.log(10.0)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    text: str
    kind: str  # NOMINALIZE or VOCAB

    def fill(self, value: str) -> str:
        if "{base}" in self.text:
            return self.text.replace("{base}", value)
        if "{word}" in self.text:
            return self.text.replace("{word}", value)
        return self.text


def load_prompts(path=None) -> list[PromptTemplate]:
    if path is None:
        raw = resources.files("ityness.data").joinpath("prompts.json").read_text("utf-8")
    else:
        with open_read(path) as fh:
            raw = fh.read()
    out = [PromptTemplate(d["id"], d["text"], d["kind"]) for d in json.loads(raw)]
    ids = [p.id for p in out]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate prompt ids")
    return out


@dataclass(frozen=True)
class ProbeRecord:
    base: Base
    prompt_id: str
    logp_ity: float
    logp_ness: float
    model_id: str

    def logp(self, choice: SuffixChoice) -> float:
        return self.logp_ity if choice is SuffixChoice.ITY else self.logp_ness


@dataclass(frozen=True)
class PreferenceRecord:
    base: Base
    choice: SuffixChoice
    model_id: str


@dataclass(frozen=True)
class AnnotationRecord:
    item: Base
    annotator_id: str
    choice: SuffixChoice


@dataclass(frozen=True)
class VocabRecord:
    word: str
    prompt_id: str
    logp: float
    frequency: int
    familiarity: float
    is_complex: bool


def _base_from_field(form: str) -> Base:
    cls = classify(form)
    if cls is None:
        raise InputError(f"probe base {form!r} does not classify")
    return Base(form, cls)


def load_probe_records(path) -> list[ProbeRecord]:
    out = []
    seen = set()
    with open_read(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                rec = ProbeRecord(
                    base=_base_from_field(d["base"]),
                    prompt_id=d["prompt_id"],
                    logp_ity=float(d["logp_ity"]),
                    logp_ness=float(d["logp_ness"]),
                    model_id=d["model_id"],
                )
            except (KeyError, ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad probe record") from exc
            if not (math.isfinite(rec.logp_ity) and math.isfinite(rec.logp_ness)):
                raise InputError(f"{path}:{lineno}: non-finite log-probability")
            key = (rec.base.form, rec.prompt_id, rec.model_id)
            if key in seen:
                raise InputError(f"{path}:{lineno}: duplicate probe record {key}")
            seen.add(key)
            out.append(rec)
    return out


def save_probe_records(records: Iterable[ProbeRecord], path) -> None:
    with open_write(path) as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "base": r.base.form,
                        "prompt_id": r.prompt_id,
                        "logp_ity": round(r.logp_ity, 6),
                        "logp_ness": round(r.logp_ness, 6),
                        "model_id": r.model_id,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_preference_records(path) -> list[PreferenceRecord]:
    out = []
    seen = set()
    with open_read(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                rec = PreferenceRecord(
                    base=_base_from_field(d["base"]),
                    choice=SuffixChoice.parse(d["choice"]),
                    model_id=d["model_id"],
                )
            except (KeyError, ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad preference record") from exc
            key = (rec.base.form, rec.model_id)
            if key in seen:
                raise InputError(f"{path}:{lineno}: duplicate preference for {key}")
            seen.add(key)
            out.append(rec)
    return out


def save_preference_records(records: Iterable[PreferenceRecord], path) -> None:
    with open_write(path) as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {"base": r.base.form, "choice": r.choice.suffix, "model_id": r.model_id},
                    sort_keys=True,
                )
                + "\n"
            )


def load_annotations(path) -> list[AnnotationRecord]:
    out = []
    with open_read(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["item", "annotator_id", "choice"]:
            raise InputError(f"{path}: unexpected annotation header {header}")
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                item, annotator, choice = line.split("\t")
                out.append(
                    AnnotationRecord(
                        _base_from_field(item), annotator, SuffixChoice.parse(choice)
                    )
                )
            except (ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad annotation row") from exc
    return out


def save_annotations(records: Iterable[AnnotationRecord], path) -> None:
    with open_write(path) as fh:
        fh.write("item\tannotator_id\tchoice\n")
        for r in records:
            fh.write(f"{r.item.form}\t{r.annotator_id}\t{r.choice.suffix}\n")


def load_vocab_records(path) -> list[VocabRecord]:
    out = []
    with open_read(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                rec = VocabRecord(
                    word=d["word"],
                    prompt_id=d["prompt_id"],
                    logp=float(d["logp"]),
                    frequency=int(d["frequency"]),
                    familiarity=float(d["familiarity"]),
                    is_complex=bool(d["is_complex"]),
                )
            except (KeyError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad vocab record") from exc
            if not (1.0 <= rec.familiarity <= 7.0):
                raise InputError(f"{path}:{lineno}: familiarity outside [1, 7]")
            out.append(rec)
    return out


def save_vocab_records(records: Iterable[VocabRecord], path) -> None:
    with open_write(path) as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "word": r.word,
                        "prompt_id": r.prompt_id,
                        "logp": round(r.logp, 6),
                        "frequency": r.frequency,
                        "familiarity": round(r.familiarity, 6),
                        "is_complex": r.is_complex,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# Core analyses
# ---------------------------------------------------------------------------


def winner(record: ProbeRecord) -> SuffixChoice:
    """Higher total log probability wins; exact ties go to ITY."""
    return (
        SuffixChoice.NESS
        if record.logp_ness > record.logp_ity
        else SuffixChoice.ITY
    )


def accuracy(
    records: Sequence[ProbeRecord],
    reference: Mapping[str, SuffixChoice],
) -> tuple[float, float, dict[str, float]]:
    """Per-prompt accuracy against a reference, averaged across prompts.

    Returns (mean, sample std across prompts, per-prompt accuracies). The
    reference must cover every base in the records.
    """
    per_prompt: dict[str, list[bool]] = defaultdict(list)
    for r in records:
        ref = reference.get(r.base.form)
        if ref is None:
            raise InputError(f"reference does not cover base {r.base.form!r}")
        per_prompt[r.prompt_id].append(winner(r) is ref)
    if not per_prompt:
        raise InputError("no probe records")
    accs = {p: sum(v) / len(v) for p, v in sorted(per_prompt.items())}
    values = list(accs.values())
    mean = sum(values) / len(values)
    if len(values) > 1:
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        std = math.sqrt(var)
    else:
        std = 0.0
    return mean, std, accs


def ness_ratio(predictions: Mapping) -> dict:
    """Share of NESS among predictions, per group key."""
    out = {}
    for key, choices in predictions.items():
        choices = list(choices)
        if not choices:
            raise InputError(f"empty prediction group {key!r}")
        out[key] = sum(1 for c in choices if c is SuffixChoice.NESS) / len(choices)
    return out


def probe_ness_ratios(records: Sequence[ProbeRecord]) -> dict[tuple[str, AdjectiveClass], float]:
    """Winner NESS share per (prompt, class)."""
    groups: dict[tuple[str, AdjectiveClass], list[SuffixChoice]] = defaultdict(list)
    for r in records:
        groups[(r.prompt_id, r.base.cls)].append(winner(r))
    return ness_ratio(groups)


def lexicon_ness_shares(entries: Sequence[LexiconEntry]) -> dict[AdjectiveClass, float]:
    """Share of bases whose preferred derivative is NESS, per class."""
    groups: dict[AdjectiveClass, list[SuffixChoice]] = defaultdict(list)
    for e in entries:
        groups[e.base.cls].append(e.preferred)
    return ness_ratio(groups)


@dataclass(frozen=True)
class RatioCorrelation:
    per_prompt_r: dict[str, float]
    per_prompt_p: dict[str, float]
    adjusted_p: dict[str, float]
    mean_r: float
    std_r: float


def ratio_correlation(
    entries: Sequence[LexiconEntry], records: Sequence[ProbeRecord]
) -> RatioCorrelation:
    """Pearson correlation of class-level NESS shares, lexicon vs probes, per prompt."""
    shares = lexicon_ness_shares(entries)
    probe_ratios = probe_ness_ratios(records)
    prompts = sorted({p for p, _ in probe_ratios})
    classes = sorted(shares, key=lambda c: c.suffix)
    rs, ps = {}, {}
    for prompt in prompts:
        x = [shares[c] for c in classes if (prompt, c) in probe_ratios]
        y = [probe_ratios[(prompt, c)] for c in classes if (prompt, c) in probe_ratios]
        r, p = pearson_r(x, y)
        rs[prompt] = r
        ps[prompt] = p
    adj = dict(zip(prompts, holm_bonferroni([ps[p] for p in prompts])))
    values = [rs[p] for p in prompts]
    mean = sum(values) / len(values)
    std = (
        math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
        if len(values) > 1
        else 0.0
    )
    return RatioCorrelation(rs, ps, adj, mean, std)


def confidence_delta(
    records: Sequence[ProbeRecord],
    attested: Mapping[str, SuffixChoice],
) -> dict[tuple[AdjectiveClass, str], float]:
    """Mean log-probability advantage of the attested derivative.

    Only bases present in `attested` (exactly one attested derivative) are
    used; the result is averaged per (class, prompt), in natural log units.
    """
    sums: dict[tuple[AdjectiveClass, str], list[float]] = defaultdict(list)
    for r in records:
        choice = attested.get(r.base.form)
        if choice is None:
            continue
        other = SuffixChoice.NESS if choice is SuffixChoice.ITY else SuffixChoice.ITY
        sums[(r.base.cls, r.prompt_id)].append(r.logp(choice) - r.logp(other))
    return {k: sum(v) / len(v) for k, v in sums.items()}


@dataclass(frozen=True)
class BucketResult:
    delta_low: float
    delta_high: float
    relative_increase: float  # percent
    n_low: int
    n_high: int


def attested_only_map(entries: Sequence[LexiconEntry]) -> dict[str, SuffixChoice]:
    out = {}
    for e in entries:
        only = e.attested_only
        if only is not None:
            out[e.base.form] = only
    return out


def frequency_buckets(
    entries: Sequence[LexiconEntry],
    records: Sequence[ProbeRecord],
) -> dict[tuple[AdjectiveClass, str], BucketResult]:
    """Confidence gain from low- to high-frequency attested derivatives.

    Buckets split on the attested derivative's token count: (0, 10] vs
    (100, inf). Classes with an empty bucket for a prompt are dropped with
    a warning.
    """
    attested = attested_only_map(entries)
    counts = {
        e.base.form: e.count(e.attested_only)
        for e in entries
        if e.attested_only is not None
    }
    cells: dict[tuple[AdjectiveClass, str, str], list[float]] = defaultdict(list)
    for r in records:
        choice = attested.get(r.base.form)
        if choice is None:
            continue
        f = counts[r.base.form]
        if LOW_BUCKET[0] < f <= LOW_BUCKET[1]:
            bucket = "low"
        elif f > HIGH_BUCKET[0]:
            bucket = "high"
        else:
            continue
        other = SuffixChoice.NESS if choice is SuffixChoice.ITY else SuffixChoice.ITY
        cells[(r.base.cls, r.prompt_id, bucket)].append(r.logp(choice) - r.logp(other))
    out = {}
    keys = sorted({(c, p) for c, p, _ in cells}, key=lambda k: (k[0].suffix, k[1]))
    for cls, prompt in keys:
        lo = cells.get((cls, prompt, "low"))
        hi = cells.get((cls, prompt, "high"))
        if not lo or not hi:
            log.warning("class %s prompt %s: empty frequency bucket, skipped", cls, prompt)
            continue
        d_lo = sum(lo) / len(lo)
        d_hi = sum(hi) / len(hi)
        if d_lo == 0:
            log.warning("class %s prompt %s: zero low-bucket delta, skipped", cls, prompt)
            continue
        out[(cls, prompt)] = BucketResult(
            d_lo, d_hi, (d_hi - d_lo) / d_lo * 100.0, len(lo), len(hi)
        )
    return out


def class_entropy(entries: Sequence[LexiconEntry]) -> dict[AdjectiveClass, float]:
    """Entropy (bits) of the per-base preferred-derivative distribution."""
    shares = lexicon_ness_shares(entries)
    return {c: shannon_entropy([1.0 - s, s]) for c, s in shares.items()}


def entropy_confidence_correlation(
    entries: Sequence[LexiconEntry],
    buckets: Mapping[tuple[AdjectiveClass, str], BucketResult],
) -> tuple[float, float, float]:
    """Pearson r of class entropy vs relative confidence increase, with r^2."""
    entropies = class_entropy(entries)
    xs, ys = [], []
    for (cls, _prompt), res in sorted(
        buckets.items(), key=lambda kv: (kv[0][0].suffix, kv[0][1])
    ):
        xs.append(entropies[cls])
        ys.append(res.relative_increase)
    if len(set(ys)) <= 1 or len(set(xs)) <= 1:
        raise UndefinedStatisticError("confidence increases have no variance")
    r, p = pearson_r(xs, ys)
    return r, r * r, p


# ---------------------------------------------------------------------------
# Human annotations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HumanSummary:
    majority: dict[str, SuffixChoice]
    tie_items: tuple[str, ...]
    item_ness_ratio: dict[str, float]
    annotator_ness_ratio: dict[tuple[str, AdjectiveClass], float]


def human_majority(annotations: Sequence[AnnotationRecord]) -> HumanSummary:
    """Majority vote per item; ties go to ITY and are flagged."""
    votes: dict[str, list[SuffixChoice]] = defaultdict(list)
    items: dict[str, Base] = {}
    per_annotator: dict[tuple[str, AdjectiveClass], list[SuffixChoice]] = defaultdict(list)
    for a in annotations:
        votes[a.item.form].append(a.choice)
        items[a.item.form] = a.item
        per_annotator[(a.annotator_id, a.item.cls)].append(a.choice)
    majority: dict[str, SuffixChoice] = {}
    ties = []
    ratios = {}
    for form in sorted(votes):
        vs = votes[form]
        ness = sum(1 for v in vs if v is SuffixChoice.NESS)
        ratios[form] = ness / len(vs)
        if ness * 2 == len(vs):
            ties.append(form)
            majority[form] = SuffixChoice.ITY
        else:
            majority[form] = SuffixChoice.NESS if ness * 2 > len(vs) else SuffixChoice.ITY
    annotator_ratio = {
        key: sum(1 for v in vs if v is SuffixChoice.NESS) / len(vs)
        for key, vs in sorted(per_annotator.items(), key=lambda kv: (kv[0][0], kv[0][1].suffix))
    }
    return HumanSummary(majority, tuple(ties), ratios, annotator_ratio)


def annotation_matrix(
    annotations: Sequence[AnnotationRecord],
    cls: Optional[AdjectiveClass] = None,
) -> RatingMatrix:
    """Items x {ITY, NESS} count matrix, optionally restricted to one class."""
    votes: dict[str, list[SuffixChoice]] = defaultdict(list)
    for a in annotations:
        if cls is None or a.item.cls is cls:
            votes[a.item.form].append(a.choice)
    rows = []
    for form in sorted(votes):
        vs = votes[form]
        ity = sum(1 for v in vs if v is SuffixChoice.ITY)
        rows.append((ity, len(vs) - ity))
    if not rows:
        raise InputError("no annotations for requested class")
    return RatingMatrix.build(rows)


def annotator_class_correlation(
    annotations: Sequence[AnnotationRecord],
    cls_a: AdjectiveClass,
    cls_b: AdjectiveClass,
) -> float:
    """Pearson r across annotators of per-class NESS rates."""
    summary = human_majority(annotations)
    annotators = sorted({aid for aid, _ in summary.annotator_ness_ratio})
    x, y = [], []
    for aid in annotators:
        if (aid, cls_a) in summary.annotator_ness_ratio and (
            aid,
            cls_b,
        ) in summary.annotator_ness_ratio:
            x.append(summary.annotator_ness_ratio[(aid, cls_a)])
            y.append(summary.annotator_ness_ratio[(aid, cls_b)])
    r, _ = pearson_r(x, y)
    return r


# ---------------------------------------------------------------------------
# Familiarity / vocabulary analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamiliarityReport:
    n_complex: int
    n_simplex: int
    mean_freq_complex: float
    mean_freq_simplex: float
    welch_familiarity: tuple[float, float, float]  # t, df, p
    welch_logp: tuple[float, float, float]
    r2_familiarity_logfreq: float
    f_familiarity_logfreq: float
    r2_logp_logfreq: float
    f_logp_logfreq: float
    n_total: int


def familiarity_analysis(
    records: Sequence[VocabRecord],
    frequency_cutoff: int = 10_000,
) -> FamiliarityReport:
    """Group comparison below the cutoff plus full-set log-frequency fits.

    Per-word log probability is the mean over the vocabulary prompts.
    """
    per_word: dict[str, list[VocabRecord]] = defaultdict(list)
    for r in records:
        per_word[r.word].append(r)
    words = []
    for w in sorted(per_word):
        rs = per_word[w]
        logp = sum(r.logp for r in rs) / len(rs)
        words.append((w, logp, rs[0].frequency, rs[0].familiarity, rs[0].is_complex))
    if len(words) < 10:
        raise InputError("too few vocabulary records")

    sub = [w for w in words if w[2] < frequency_cutoff]
    comp = [w for w in sub if w[4]]
    simp = [w for w in sub if not w[4]]
    if len(comp) < 2 or len(simp) < 2:
        raise InputError("need both complex and simplex words below the cutoff")
    t_fam = welch_t([w[3] for w in comp], [w[3] for w in simp])
    t_logp = welch_t([w[1] for w in comp], [w[1] for w in simp])

    logf = [math.log10(max(w[2], 1)) for w in words]
    fit_fam = ols(logf, [w[3] for w in words])
    fit_logp = ols(logf, [w[1] for w in words])
    return FamiliarityReport(
        n_complex=len(comp),
        n_simplex=len(simp),
        mean_freq_complex=sum(w[2] for w in comp) / len(comp),
        mean_freq_simplex=sum(w[2] for w in simp) / len(simp),
        welch_familiarity=t_fam,
        welch_logp=t_logp,
        r2_familiarity_logfreq=fit_fam.r_squared,
        f_familiarity_logfreq=fit_fam.f_statistic,
        r2_logp_logfreq=fit_logp.r_squared,
        f_logp_logfreq=fit_logp.f_statistic,
        n_total=len(words),
    )
