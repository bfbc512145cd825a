"""Stage 3: the human annotation fixture.

Two stages of annealing: first per-item NESS vote counts (0..11) under the
majority vector from stage 2, hitting each class's mean item ratio and
Gwet-AC1 target (which together pin overall Fleiss kappa); then assignment
of votes to the 11 annotators of each survey half, hitting the per-annotator
cross-class correlation targets and the -ous preference split.
"""

from __future__ import annotations

import json
import pathlib
import random
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from fixgen.lexicon import load_nonces, load_targets

from ityness.evaluation import AnnotationRecord, save_annotations
from ityness.morphlex import Base, SuffixChoice
from ityness.stats import RatingMatrix, fleiss_kappa, gwet_ac1, pearson_r

I, N = SuffixChoice.ITY, SuffixChoice.NESS
RATERS = 11
REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

PINNED_COUNTS = {"rebelorous": 11, "indaminous": 2}


def pa_of(counts):
    total = 0.0
    for c in counts:
        total += (c * (c - 1) + (RATERS - c) * (RATERS - c - 1)) / (RATERS * (RATERS - 1))
    return total / len(counts)


def ac1_of(counts):
    pa = pa_of(counts)
    pi = sum(counts) / (len(counts) * RATERS)
    pe = 2 * pi * (1 - pi)
    return (pa - pe) / (1 - pe)


def solve_counts(items, majority, pi_target, ac1_target, pinned, seed):
    """Per-item NESS counts: majority respected, mean and AC1 on target."""
    rng = random.Random(seed)
    counts = {}
    for q in items:
        if q in pinned:
            counts[q] = pinned[q]
        elif majority[q] is N:
            counts[q] = rng.randint(6, 9)
        else:
            counts[q] = rng.randint(2, 5)

    def energy():
        vec = [counts[q] for q in items]
        mean = sum(vec) / (len(vec) * RATERS)
        return abs(mean - pi_target) * 3000 + abs(ac1_of(vec) - ac1_target) * 3000

    cur = energy()
    for step in range(300_000):
        if cur < 1.0:
            break
        q = items[rng.randrange(len(items))]
        if q in pinned:
            continue
        old = counts[q]
        new = old + rng.choice((-1, 1))
        lo, hi = (6, 11) if majority[q] is N else (0, 5)
        if not (lo <= new <= hi):
            continue
        counts[q] = new
        e = energy()
        if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.5):
            cur = e
        else:
            counts[q] = old
    vec = [counts[q] for q in items]
    mean = sum(vec) / (len(vec) * RATERS)
    assert abs(mean - pi_target) < 0.004, mean
    assert abs(ac1_of(vec) - ac1_target) < 0.004, ac1_of(vec)
    return counts


def assign_votes(counts_by_class, halves, corr_targets, seed):
    """Pick which annotators vote NESS per item (stage-two annealing)."""
    rng = random.Random(seed)
    annotators = {0: [f"a{j:02d}" for j in range(1, 12)],
                  1: [f"a{j:02d}" for j in range(12, 23)]}
    votes: dict[str, set] = {}
    item_half: dict[str, int] = {}
    item_cls: dict[str, str] = {}
    for cls, counts in counts_by_class.items():
        for q, c in counts.items():
            h = halves[q]
            item_half[q] = h
            item_cls[q] = cls
            votes[q] = set(rng.sample(annotators[h], c))

    def rates():
        per = {}
        for aid in annotators[0] + annotators[1]:
            per[aid] = {}
        tallies = {}
        for q, who in votes.items():
            cls = item_cls[q]
            h = item_half[q]
            for aid in annotators[h]:
                key = (aid, cls)
                n_votes, n_items = tallies.get(key, (0, 0))
                tallies[key] = (n_votes + (aid in who), n_items + 1)
        out = {}
        for (aid, cls), (v, n) in tallies.items():
            out.setdefault(cls, {})[aid] = v / n
        return out

    def energy():
        r = rates()
        aids = sorted(r["able"])
        e = 0.0
        for (ca, cb), target in corr_targets.items():
            got, _ = pearson_r([r[ca][a] for a in aids], [r[cb][a] for a in aids])
            e += abs(got - target) * 4000
        ous_ity = sum(1 for a in aids if r["ous"][a] < 0.5)
        e += abs(ous_ity - 13) * 120
        return e

    items = sorted(votes)
    cur = energy()
    for step in range(120_000):
        if cur < 2.0:
            break
        q = items[rng.randrange(len(items))]
        who = votes[q]
        h = item_half[q]
        ins = [a for a in annotators[h] if a not in who]
        outs = sorted(who)
        if not ins or not outs:
            continue
        a_out = outs[rng.randrange(len(outs))]
        a_in = ins[rng.randrange(len(ins))]
        who.discard(a_out)
        who.add(a_in)
        e = energy()
        if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.8):
            cur = e
        else:
            who.discard(a_in)
            who.add(a_out)
    print(f"annotator assignment energy: {cur:.2f}")
    return votes, item_half, annotators


def main():
    targets = load_targets()
    nonces = load_nonces()
    sidecar = json.loads((FIXTURES / "nonce_targets.json").read_text("utf-8"))
    majority = {q: SuffixChoice.parse(v) for q, v in sidecar["human_majority"].items()}

    agree = targets["agreement"]
    counts_by_class = {}
    for cls in ("able", "ish", "ive", "ous"):
        label = "-" + cls
        items = sorted(nonces[cls])
        pinned = {q: c for q, c in PINNED_COUNTS.items() if q in items}
        counts = solve_counts(
            items,
            majority,
            agree["mean_item_ness_ratio"][label],
            agree["gwet_ac1"][label],
            pinned,
            seed=777 + len(cls),
        )
        counts_by_class[cls] = counts
        print(f"{label}: counts solved (AC1={ac1_of(list(counts.values())):.4f})")

    halves = {}
    for cls in ("able", "ish", "ive", "ous"):
        for j, q in enumerate(sorted(nonces[cls])):
            halves[q] = j % 2
    votes, item_half, annotators = assign_votes(
        counts_by_class,
        halves,
        {("able", "ive"): agree["annotator_corr_able_ive"],
         ("ive", "ous"): agree["annotator_corr_ive_ous"]},
        seed=31337,
    )

    records = []
    for cls in ("able", "ish", "ive", "ous"):
        for q in sorted(nonces[cls]):
            base = Base.from_form(q)
            who = votes[q]
            for aid in annotators[item_half[q]]:
                records.append(
                    AnnotationRecord(base, aid, N if aid in who else I)
                )
    save_annotations(records, FIXTURES / "annotations.tsv")

    # verification with the real statistics code
    from ityness.evaluation import annotation_matrix, annotator_class_correlation, human_majority, load_annotations
    from ityness.morphlex import AdjectiveClass

    loaded = load_annotations(FIXTURES / "annotations.tsv")
    kappa = fleiss_kappa(annotation_matrix(loaded))
    print(f"fleiss kappa: {kappa:.4f} (target {agree['fleiss_kappa']})")
    assert abs(kappa - agree["fleiss_kappa"]) <= 0.005
    for cls in ("able", "ish", "ive", "ous"):
        got = gwet_ac1(annotation_matrix(loaded, AdjectiveClass.parse(cls)))
        want = agree["gwet_ac1"]["-" + cls]
        print(f"gwet ac1 -{cls}: {got:.4f} (target {want})")
        assert abs(got - want) <= 0.005
    c_ai = annotator_class_correlation(loaded, AdjectiveClass.ABLE, AdjectiveClass.IVE)
    c_io = annotator_class_correlation(loaded, AdjectiveClass.IVE, AdjectiveClass.OUS)
    print(f"annotator corr able/ive {c_ai:.4f}, ive/ous {c_io:.4f}")
    assert abs(c_ai - agree["annotator_corr_able_ive"]) <= 0.005
    assert abs(c_io - agree["annotator_corr_ive_ous"]) <= 0.005
    summary = human_majority(loaded)
    for q, h in majority.items():
        assert summary.majority[q] is h, q
    assert summary.item_ness_ratio["rebelorous"] == 1.0
    assert abs(summary.item_ness_ratio["indaminous"] - 0.1818) < 0.001
    print(f"wrote {len(records)} annotation records")


if __name__ == "__main__":
    main()
