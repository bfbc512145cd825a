"""Stage 4: seen-word probe records.

Samples bases from the lexicon fixture per class (preserving each class's
preferred-derivative share), solves integer per-(class, prompt) correct
counts so the per-class accuracy table, the overall prompt mean/std, and the
per-prompt ratio correlations come out at their reference values, then
realizes log-probabilities whose per-bucket means encode the positive
frequency-confidence effect and its entropy correlation.
"""

from __future__ import annotations

import json
import math
import pathlib
import random
import sys
from collections import defaultdict

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from fixgen.lexicon import load_targets

from ityness.corpus import load_lexicon
from ityness.evaluation import ProbeRecord, load_prompts, save_probe_records
from ityness.morphlex import AdjectiveClass, SuffixChoice
from ityness.stats import pearson_r, shannon_entropy

I, N = SuffixChoice.ITY, SuffixChoice.NESS
REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

SAMPLE_SIZES = {
    "-able": 700, "-al": 570, "-ar": 150, "-ed": 300, "-ic": 375,
    "-ing": 100, "-ish": 95, "-ive": 390, "-less": 125, "-ous": 210,
}
# mean low-bucket confidence (natural log units) per regularity group
DELTA_LOW = {"r-ness": 22.0, "r-ity": 11.0, "v-ness": 4.2, "v-ity": 4.8}


def sample_bases(entries, rng):
    """Stratified per-class sample: keeps the preferred-NESS share and
    guarantees both frequency buckets are populated."""
    by_class = defaultdict(list)
    for e in entries:
        if e.ity_count != e.ness_count:  # keep the reference unambiguous
            by_class[e.base.cls.label].append(e)
    picked = {}
    for label, n in SAMPLE_SIZES.items():
        pool = by_class[label]
        ness = [e for e in pool if e.preferred is N]
        ity = [e for e in pool if e.preferred is I]
        share = len(ness) / len(pool)
        n_ness = round(n * share)
        chosen = []
        for side_pool, want in ((ness, n_ness), (ity, n - n_ness)):
            if want <= 0:
                continue
            lo = [e for e in side_pool if e.attested_only and 0 < e.count(e.attested_only) <= 10]
            hi = [e for e in side_pool if e.attested_only and e.count(e.attested_only) > 100]
            lo_set = {e.base.form for e in lo}
            hi_set = {e.base.form for e in hi}
            mid = [e for e in side_pool if e.base.form not in lo_set and e.base.form not in hi_set]
            quota_lo = min(len(lo), want, max(min(8, want // 2), int(want * 0.35)))
            quota_hi = min(len(hi), want - quota_lo, max(min(8, want // 2), int(want * 0.3)))
            sel = rng.sample(sorted(lo, key=lambda e: e.base.form), quota_lo)
            sel += rng.sample(sorted(hi, key=lambda e: e.base.form), quota_hi)
            sel_set = {e.base.form for e in sel}
            rest = [e for e in sorted(mid, key=lambda e: e.base.form) if e.base.form not in sel_set]
            need = want - len(sel)
            if need > len(rest):
                sel += rest
                need -= len(rest)
                extra = [
                    e for e in sorted(side_pool, key=lambda e: e.base.form)
                    if e.base.form not in {x.base.form for x in sel}
                ]
                sel += extra[:need]
            elif need > 0:
                sel += rng.sample(rest, need)
            chosen += sel[:want]
        assert len(chosen) == n, (label, len(chosen))
        picked[label] = sorted(chosen, key=lambda e: e.base.form)
    return picked


def solve_correct_counts(ref, rng):
    """Integer correct counts k[class][prompt] hitting every accuracy target."""
    labels = sorted(SAMPLE_SIZES)
    acc = ref["seen_accuracy"]
    n = SAMPLE_SIZES
    total_n = sum(n.values())
    want_mean = ref["seen_overall"]["mean"]
    want_std = ref["seen_overall"]["std"]

    z = np.array([rng.gauss(0, 1) for _ in range(12)])
    z = (z - z.mean()) / z.std(ddof=1)
    # shared prompt effect: loading rho chosen so the overall std lands on
    # target given the class stds
    w = np.array([n[c] for c in labels], dtype=float)
    w /= w.sum()
    sigma = np.array([acc[c]["std"] for c in labels])
    rho = want_std / float((w * sigma).sum())
    rho = min(0.98, rho)

    k = {}
    for ci, c in enumerate(labels):
        mu, sd = acc[c]["mean"], acc[c]["std"]
        eps = np.array([rng.gauss(0, 1) for _ in range(12)])
        eps = (eps - eps.mean()) / eps.std(ddof=1)
        a = mu + sd * (rho * z + math.sqrt(max(0.0, 1 - rho * rho)) * eps)
        a = np.clip(a, 0.02, 1.0)
        k[c] = [int(round(v * n[c])) for v in a]

    def stats():
        per_class_mean = {c: sum(k[c]) / (12 * n[c]) for c in labels}
        per_class_std = {
            c: float(np.std([v / n[c] for v in k[c]], ddof=1)) for c in labels
        }
        overall = [sum(k[c][p] for c in labels) / total_n for p in range(12)]
        o_mean = float(np.mean(overall))
        o_std = float(np.std(overall, ddof=1))
        return per_class_mean, per_class_std, o_mean, o_std

    def energy():
        pcm, pcs, om, ostd = stats()
        e = 0.0
        for c in labels:
            e += abs(pcm[c] - acc[c]["mean"]) * 4000
            e += abs(pcs[c] - acc[c]["std"]) * 1500
        e += abs(om - want_mean) * 30000
        e += abs(ostd - want_std) * 30000
        return e

    cur = energy()
    for step in range(900_000):
        if cur < 12.0:
            break
        c = labels[rng.randrange(len(labels))]
        p = rng.randrange(12)
        old = k[c][p]
        new = old + rng.choice((-2, -1, 1, 2))
        if not (0 <= new <= n[c]):
            continue
        k[c][p] = new
        e = energy()
        if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.6):
            cur = e
        else:
            k[c][p] = old
    pcm, pcs, om, ostd = stats()
    for c in labels:
        assert abs(pcm[c] - acc[c]["mean"]) < 0.002, (c, pcm[c])
        assert abs(pcs[c] - acc[c]["std"]) < 0.006, (c, pcs[c])
    assert abs(om - want_mean) < 0.0005, om
    assert abs(ostd - want_std) < 0.0008, ostd
    print(f"accuracy solved: overall {om:.4f} +- {ostd:.4f}, energy {cur:.1f}")
    return k


def solve_ratio_targets(ref, shares, k, picked, rng):
    """Per-(class, prompt) NESS-winner counts realizing the per-prompt
    correlation sequence (mean/std on target)."""
    labels = sorted(SAMPLE_SIZES)
    n = SAMPLE_SIZES
    want_mean = ref["ratio_correlation"]["mean"]
    want_std = ref["ratio_correlation"]["std"]
    base = np.array([rng.uniform(-1, 1) for _ in range(12)])
    base = (base - base.mean()) / base.std(ddof=1)
    r_targets = np.clip(want_mean + want_std * base, None, 0.9995)
    r_targets = r_targets - (r_targets.mean() - want_mean)

    # deviation direction bounded by the smallest per-prompt error budget
    signs = {"-able": 1.0, "-al": -1.0, "-ic": 1.0, "-ive": -1.0, "-ous": 1.0, "-ar": -1.0}
    direction = {}
    for c, sign in signs.items():
        min_err = min(n[c] - v for v in k[c])
        ness_n = sum(1 for e in picked[c] if e.preferred is N)
        budget = 0.55 * min(min_err, ness_n, n[c] - ness_n)
        direction[c] = sign * budget / n[c]
    x = [shares[c] for c in labels]

    W = {}
    for p in range(12):
        target = r_targets[p]

        def r_of(scale):
            y = []
            for c in labels:
                d = direction.get(c, 0.0) * scale
                y.append(min(1.0, max(0.0, shares[c] + d)))
            return pearson_r(x, y)[0]

        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = (lo + hi) / 2
            if r_of(mid) > target:
                lo = mid
            else:
                hi = mid
        scale = (lo + hi) / 2
        for c in labels:
            d = direction.get(c, 0.0) * scale
            ratio = min(1.0, max(0.0, shares[c] + d))
            W[(c, p)] = int(round(ratio * n[c]))
    return W, r_targets


def main():
    ref = load_targets()
    rng = random.Random(555_0001)
    entries = load_lexicon(FIXTURES / "lexicon_pile.tsv.gz")
    picked = sample_bases(entries, rng)
    labels = sorted(SAMPLE_SIZES)

    shares = {
        c: sum(1 for e in picked[c] if e.preferred is N) / len(picked[c])
        for c in labels
    }
    k = solve_correct_counts(ref, rng)
    W, r_targets = solve_ratio_targets(ref, shares, k, picked, rng)

    # entropy-correlated relative confidence increases
    entropies = {}
    by_class_all = defaultdict(list)
    for e in entries:
        by_class_all[e.base.cls.label].append(e)
    for c in labels:
        share = sum(1 for e in by_class_all[c] if e.preferred is N) / len(by_class_all[c])
        entropies[c] = shannon_entropy([1 - share, share])
    group = {c: AdjectiveClass.parse(c).group.value for c in labels}

    def increases(sigma_eta):
        rng_eta = random.Random(424242)
        out = {}
        for c in labels:
            for p in range(12):
                eta = rng_eta.gauss(0, sigma_eta)
                out[(c, p)] = (7.0 + 58.0 * entropies[c]) * math.exp(eta)
        return out

    target_r2 = ref["entropy_confidence_r2"]
    lo, hi = 0.01, 1.2
    for _ in range(40):
        mid = (lo + hi) / 2
        ys = increases(mid)
        xs = [entropies[c] for c in labels for p in range(12)]
        r, _ = pearson_r(xs, [ys[(c, p)] for c in labels for p in range(12)])
        if r * r > target_r2:
            lo = mid
        else:
            hi = mid
    sigma_eta = (lo + hi) / 2
    rel_inc = increases(sigma_eta)
    xs = [entropies[c] for c in labels for p in range(12)]
    r, _ = pearson_r(xs, [rel_inc[(c, p)] for c in labels for p in range(12)])
    print(f"entropy correlation: r2={r*r:.4f} (sigma_eta={sigma_eta:.3f})")
    assert abs(r * r - target_r2) < 0.015

    prompts = [p.id for p in load_prompts() if p.kind == "NOMINALIZE"]
    records = []
    for c in labels:
        sample = picked[c]
        n_c = len(sample)
        ness_ref = [e for e in sample if e.preferred is N]
        ity_ref = [e for e in sample if e.preferred is I]
        # bucket membership for attested-only bases
        def bucket(e):
            only = e.attested_only
            if only is None:
                return None
            f = e.count(only)
            if 0 < f <= 10:
                return "low"
            if f > 100:
                return "high"
            return None

        d_low = DELTA_LOW[group[c]]
        for p_idx, pid in enumerate(prompts):
            correct_n = k[c][p_idx]
            errors_n = n_c - correct_n
            w_target = W[(c, p_idx)]
            ness_count = len(ness_ref)
            # err_ity - err_ness = W - ness_count; err_ity + err_ness = errors
            diff = w_target - ness_count
            if (errors_n + diff) % 2:
                diff += 1 if diff < 0 else -1
            err_ity = (errors_n + diff) // 2
            err_ness = errors_n - err_ity
            # clamp while preserving the total error count
            err_ity = max(0, min(err_ity, len(ity_ref)))
            err_ness = errors_n - err_ity
            if err_ness > len(ness_ref):
                err_ness = len(ness_ref)
                err_ity = min(errors_n - err_ness, len(ity_ref))
            if err_ness < 0:
                err_ness = 0
                err_ity = min(errors_n, len(ity_ref))
            assert err_ity + err_ness == errors_n, (c, p_idx, err_ity, err_ness, errors_n)
            # prefer errors on bases outside the buckets
            def error_order(side):
                outside = [e for e in side if bucket(e) is None]
                inside = [e for e in side if bucket(e) is not None]
                return outside + inside

            err_set = set()
            for side, count in ((error_order(ity_ref), err_ity), (error_order(ness_ref), err_ness)):
                for e in side[:count]:
                    err_set.add(e.base.form)

            # per-bucket positive delta targets
            dl = d_low * rng.uniform(0.9, 1.1)
            dh = dl * (1.0 + rel_inc[(c, p_idx)] / 100.0)
            cell = {"low": [], "high": [], None: []}
            for e in sample:
                cell[bucket(e)].append(e)
            for b, mean_target in (("low", dl), ("high", dh), (None, dl * 0.8)):
                group_entries = cell[b]
                if not group_entries:
                    continue
                deltas = {}
                pos_forms = []
                neg = 0.0
                for e in group_entries:
                    if e.base.form in err_set:
                        deltas[e.base.form] = -rng.uniform(0.3, 1.2)
                        neg += deltas[e.base.form]
                    else:
                        deltas[e.base.form] = rng.uniform(0.5, 1.5)
                        pos_forms.append(e.base.form)
                if b is not None and pos_forms:
                    want_sum = mean_target * len(group_entries)
                    scale = (want_sum - neg) / sum(deltas[f] for f in pos_forms)
                    for f in pos_forms:
                        deltas[f] *= scale
                else:
                    for f in pos_forms:
                        deltas[f] *= 6.0
                for e in group_entries:
                    delta = deltas[e.base.form]
                    only = e.attested_only
                    att = only if only is not None else e.preferred
                    level = -rng.uniform(5.0, 16.0)
                    logp_att = level
                    logp_un = level - delta
                    if att is I:
                        records.append(ProbeRecord(e.base, pid, logp_att, logp_un, "gptj"))
                    else:
                        records.append(ProbeRecord(e.base, pid, logp_un, logp_att, "gptj"))

    save_probe_records(records, FIXTURES / "probes_seen.jsonl.gz")
    print(f"wrote {len(records)} seen probe records")

    # verify through the real evaluation code
    from ityness.evaluation import (
        accuracy,
        entropy_confidence_correlation,
        frequency_buckets,
        load_probe_records,
        ratio_correlation,
    )

    loaded = load_probe_records(FIXTURES / "probes_seen.jsonl.gz")
    sampled_entries = [e for c in labels for e in picked[c]]
    reference = {e.base.form: e.preferred for e in sampled_entries}
    mean, std, _per = accuracy(loaded, reference)
    print(f"overall accuracy {mean:.4f} +- {std:.4f}")
    assert abs(mean - ref["seen_overall"]["mean"]) < 0.0008
    assert abs(std - ref["seen_overall"]["std"]) < 0.0012
    for c in labels:
        recs = [r for r in loaded if r.base.cls.label == c]
        m_c, s_c, _ = accuracy(recs, reference)
        assert abs(m_c - ref["seen_accuracy"][c]["mean"]) < 0.003, (c, m_c)
    rc = ratio_correlation(entries, loaded)
    print(f"ratio correlation {rc.mean_r:.4f} +- {rc.std_r:.4f}")
    assert abs(rc.mean_r - ref["ratio_correlation"]["mean"]) < 0.0012
    assert abs(rc.std_r - ref["ratio_correlation"]["std"]) < 0.0015
    buckets = frequency_buckets(entries, loaded)
    assert len(buckets) == 120, len(buckets)
    assert all(b.relative_increase > 0 for b in buckets.values())
    r_e, r2_e, p_e = entropy_confidence_correlation(entries, buckets)
    print(f"entropy confidence r2 {r2_e:.4f} (p={p_e:.2e})")
    assert abs(r2_e - ref["entropy_confidence_r2"]) < 0.02
    print("seen probe fixture verified")


if __name__ == "__main__":
    main()
