"""Stage 6: the small synthetic corpus and matched probe/annotation inputs.

Scales a stratified slice of the big lexicon down to a ~1 MB text corpus
such that count -> extract recovers exactly the scaled lexicon, then writes
matching probe, preference, annotation, and vocabulary inputs so the whole
pipeline can run end to end in seconds. No reference statistics are encoded
here; the mini inputs exist for determinism and interface coverage.
"""

from __future__ import annotations

import json
import pathlib
import random
import sys
from collections import defaultdict

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from ityness import corpus, noncegen
from ityness.evaluation import (
    AnnotationRecord,
    PreferenceRecord,
    ProbeRecord,
    VocabRecord,
    load_prompts,
    save_annotations,
    save_preference_records,
    save_probe_records,
    save_vocab_records,
)
from ityness.ioutil import open_write
from ityness.morphlex import AdjectiveClass, Base, SuffixChoice, apply_suffix

I, N = SuffixChoice.ITY, SuffixChoice.NESS
REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
MINI = FIXTURES / "mini"

PER_CLASS = 110
FILLERS = (
    "the of and to in that it was for on are with as his they at be this from "
    "have or had by word but what some can out other were all there when up use "
    "your how said an each she which do their time if will way about many then "
    "them would write like so these her long make thing see him two has look more "
    "day could go come did my sound no most number who over know water than call "
    "first people may down side been now find any new work part take get place "
    "made live where after back little only round man year came show every good "
    "me give our under name very through just form much great think say help low "
    "line before turn cause same mean differ move right boy old too does tell "
    "sentence set three want air well also play small end put home read hand port "
    "large spell add even land here must big high such follow act why ask men "
    "change went light kind off need house picture try us again animal point "
    "mother world near build self earth father head stand own page should country "
    "found answer school grow study still learn plant cover food sun four between "
    "state keep eye never last let thought city tree cross farm hard start might "
    "story saw far sea draw left late run while press close night real life few "
    "north open seem together next white children begin got walk example ease "
    "paper group always music those both mark often letter until mile river car "
    "feet care second book carry took science eat room friend began idea fish "
    "mountain stop once base hear horse cut sure watch color face wood main"
).split()


def scaled_count(c: int) -> int:
    return max(1, min(400, round(c / 300)))


def main():
    rng = random.Random(777_000)
    entries = corpus.load_lexicon(FIXTURES / "lexicon_pile.tsv.gz")
    by_class = defaultdict(list)
    for e in entries:
        by_class[e.base.cls].append(e)

    mini_entries = []
    for cls in AdjectiveClass:
        pool = sorted(by_class[cls], key=lambda e: e.base.form)
        sample = rng.sample(pool, min(PER_CLASS, len(pool)))
        chosen = {e.base.form for e in sample}
        scaled = [
            corpus.LexiconEntry(
                base=e.base,
                base_count=max(1, min(40, round(e.base_count / 50))),
                ity_count=scaled_count(e.ity_count) if e.ity_count else 0,
                ness_count=scaled_count(e.ness_count) if e.ness_count else 0,
            )
            for e in sample
        ]
        # both frequency buckets must be populated per class
        def bucket_of(e):
            only = e.attested_only
            if only is None:
                return None
            f = e.count(only)
            if 0 < f <= 10:
                return "low"
            if f > 100:
                return "high"
            return None

        for want in ("low", "high"):
            have = sum(1 for e in scaled if bucket_of(e) == want)
            if have >= 3:
                continue
            for e in pool:
                if e.base.form in chosen:
                    continue
                cand = corpus.LexiconEntry(
                    base=e.base,
                    base_count=max(1, min(40, round(e.base_count / 50))),
                    ity_count=scaled_count(e.ity_count) if e.ity_count else 0,
                    ness_count=scaled_count(e.ness_count) if e.ness_count else 0,
                )
                if bucket_of(cand) == want:
                    scaled.append(cand)
                    chosen.add(e.base.form)
                    have += 1
                    if have >= 3:
                        break
        mini_entries.extend(scaled)
    mini_entries.sort(key=lambda e: e.base.form)

    tokens = []
    for e in mini_entries:
        tokens += [e.base.form] * e.base_count
        if e.ity_count:
            tokens += [apply_suffix(e.base, I)] * e.ity_count
        if e.ness_count:
            tokens += [apply_suffix(e.base, N)] * e.ness_count
    # pad with filler words to roughly one megabyte of text
    target_bytes = 1_050_000
    approx = sum(len(t) + 1 for t in tokens)
    while approx < target_bytes:
        w = FILLERS[rng.randrange(len(FILLERS))]
        tokens.append(w)
        approx += len(w) + 1
    rng.shuffle(tokens)
    MINI.mkdir(parents=True, exist_ok=True)
    with open_write(MINI / "corpus.txt.gz") as fh:
        for i in range(0, len(tokens), 12):
            fh.write(" ".join(tokens[i : i + 12]) + "\n")

    # the pipeline must recover exactly this lexicon
    table = corpus.count_file(MINI / "corpus.txt.gz", fmt="text")
    extracted = corpus.extract_lexicon(table)
    assert extracted == mini_entries, "mini corpus does not round-trip"
    corpus.save_lexicon(mini_entries, MINI / "lexicon.tsv")

    # nonce inputs for the end-to-end regularity checks
    freq = corpus.lexicon_frequency_table(mini_entries)
    nonce_bases = []
    for cls in (AdjectiveClass.ABLE, AdjectiveClass.ISH, AdjectiveClass.IVE, AdjectiveClass.OUS):
        words = [e.base.form for e in mini_entries if e.base.cls is cls]
        model, modal = noncegen.train_bigrams(words)
        spec = noncegen.NonceSpec(cls=cls, lengths=modal, per_length=5, seed=42)
        nonce_bases += noncegen.generate(model, spec, freq, known=set(words))
    noncegen.save_nonces(nonce_bases, MINI / "nonce.tsv")

    prompts = [p.id for p in load_prompts() if p.kind == "NOMINALIZE"]
    seen_records = []
    sample = rng.sample(mini_entries, 260)
    for e in sorted(sample, key=lambda e: e.base.form):
        for pid in prompts:
            correct = rng.random() < 0.9
            level = -rng.uniform(5, 18)
            gap = rng.uniform(0.5, 5.0)
            att = e.preferred if correct else (N if e.preferred is I else I)
            lw, ll = level, level - gap
            seen_records.append(
                ProbeRecord(
                    e.base, pid,
                    lw if att is I else ll,
                    ll if att is I else lw,
                    "gptj-mini",
                )
            )
    save_probe_records(seen_records, MINI / "probes_seen.jsonl")

    nonce_records = []
    prefs = []
    annotations = []
    annotators = [f"m{j:02d}" for j in range(1, 12)]
    for b in nonce_bases:
        lean_ness = b.cls.group.value.endswith("ness")
        for pid in prompts:
            ness_wins = rng.random() < (0.85 if lean_ness else 0.25)
            level = -rng.uniform(5, 18)
            gap = rng.uniform(0.5, 5.0)
            nonce_records.append(
                ProbeRecord(
                    b, pid,
                    level - gap if ness_wins else level,
                    level if ness_wins else level - gap,
                    "gptj-mini",
                )
            )
        prefs.append(
            PreferenceRecord(b, N if rng.random() < (0.8 if lean_ness else 0.3) else I, "gpt4-mini")
        )
        n_ness = rng.randint(7, 11) if lean_ness else rng.randint(0, 4)
        voters = set(rng.sample(annotators, n_ness))
        for aid in annotators:
            annotations.append(AnnotationRecord(b, aid, N if aid in voters else I))
    save_probe_records(nonce_records, MINI / "probes_nonce.jsonl")
    save_preference_records(prefs, MINI / "preferences.jsonl")
    save_annotations(annotations, MINI / "annotations.tsv")

    vocab_prompts = [p.id for p in load_prompts() if p.kind == "VOCAB"]
    vocab_records = []
    from fixgen.wordgen import make_stem

    used = set()
    for i in range(300):
        w = make_stem(rng, rng.randint(4, 9))
        if w in used:
            continue
        used.add(w)
        f = max(1, int(rng.paretovariate(0.8) * 5))
        is_complex = rng.random() < 0.35
        fam = min(7.0, max(1.0, 2.0 + 0.6 * len(str(f)) + rng.uniform(-0.8, 0.8)))
        base_lp = -4.0 - rng.uniform(0, 14)
        for pid in vocab_prompts:
            vocab_records.append(
                VocabRecord(w, pid, base_lp + rng.uniform(-0.2, 0.2), f, fam, is_complex)
            )
    save_vocab_records(vocab_records, MINI / "vocab.jsonl")
    print(
        f"mini: {len(mini_entries)} entries, {len(tokens)} corpus tokens, "
        f"{len(nonce_bases)} nonces, {len(seen_records)}+{len(nonce_records)} probes"
    )


if __name__ == "__main__":
    main()
