"""Stage 5: the familiarity / vocabulary-test fixture.

19,320 words with integer corpus frequencies, 1-7 familiarity ratings, and
per-prompt log-probabilities. The below-cutoff subset (1,005 complex /
1,830 simplex) carries exact group moments so the two Welch tests land on
their reference t and df values; the full-set regressions against log
frequency are tuned to the reference R^2 by scaling residuals.
"""

from __future__ import annotations

import json
import math
import pathlib
import random
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from fixgen.lexicon import load_targets
from fixgen.wordgen import make_stem

from ityness.evaluation import VocabRecord, load_prompts, save_vocab_records
from ityness.morphlex import AffixInventory, parse_word

REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

PROMPT_OFFSETS = {"v01": -0.30, "v02": -0.10, "v03": 0.10, "v04": 0.30}


def solve_group_sds(t_target, df_target, n1, n2, scale):
    """Find (s1, s2) with s1^2+s2^2 = 2*scale^2 matching the Welch df."""

    def df_of(s1, s2):
        u, v = s1 * s1 / n1, s2 * s2 / n2
        return (u + v) ** 2 / (u * u / (n1 - 1) + v * v / (n2 - 1))

    lo, hi = 0.3, 2.5  # ratio s1/s2; df decreases as the ratio grows
    for _ in range(60):
        ratio = (lo + hi) / 2
        s2 = math.sqrt(2.0 * scale * scale / (1 + ratio * ratio))
        s1 = ratio * s2
        if df_of(s1, s2) > df_target:
            lo = ratio
        else:
            hi = ratio
    ratio = (lo + hi) / 2
    s2 = math.sqrt(2.0 * scale * scale / (1 + ratio * ratio))
    s1 = ratio * s2
    delta = t_target * math.sqrt(s1 * s1 / n1 + s2 * s2 / n2)
    return s1, s2, delta, df_of(s1, s2)


def exact_moment_sample(rng, n, mean, sd, trend=None):
    """Bounded values with exactly the requested sample mean and sd (ddof=1).

    An optional trend vector is blended in before standardizing, so the
    values correlate with it while the group moments stay exact."""
    z = np.array([rng.uniform(-1, 1) for _ in range(n)])
    if trend is not None:
        t = np.asarray(trend, dtype=float)
        t = (t - t.mean()) / max(t.std(ddof=1), 1e-9)
        z = 1.6 * t + z
    z = z - z.mean()
    z = z / z.std(ddof=1)
    return mean + sd * z


def split_frequencies(rng, n, total, lo, hi):
    """n integers in [lo, hi] with an exact sum."""
    vals = np.array([rng.uniform(0, 1) for _ in range(n)])
    vals = lo + (vals / vals.sum()) * (total - lo * n)
    out = [int(v) for v in vals]
    out = [min(hi, max(lo, v)) for v in out]
    diff = total - sum(out)
    i = 0
    while diff != 0:
        j = i % n
        if diff > 0 and out[j] < hi:
            out[j] += 1
            diff -= 1
        elif diff < 0 and out[j] > lo:
            out[j] -= 1
            diff += 1
        i += 1
    return out


def generate_words(rng, inventory, n_complex, n_simplex):
    """Word forms whose parse agrees with their complexity flag."""
    stems = sorted(inventory.stems)
    prefixes = sorted(p for p in inventory.prefixes if len(p) >= 2)
    suffixes = sorted(s for s in inventory.suffixes if len(s) >= 2)
    used = set()
    complex_words = []
    while len(complex_words) < n_complex:
        stem = rng.choice(stems)
        if rng.random() < 0.5:
            word = rng.choice(prefixes) + stem
        else:
            from ityness.morphlex import attach_variants

            word = rng.choice(attach_variants(stem, rng.choice(suffixes)))
        if word in used or len(word) < 5:
            continue
        if not parse_word(word, inventory).is_complex:
            continue
        used.add(word)
        complex_words.append(word)
    simplex_words = []
    while len(simplex_words) < n_simplex:
        word = make_stem(rng, rng.randint(4, 9))
        if word in used or not word.isalpha():
            continue
        if parse_word(word, inventory).is_complex:
            continue
        used.add(word)
        simplex_words.append(word)
    return complex_words, simplex_words


def tune_r2(x, y_fixed_idx, y, target, rng, line_a, line_b, rest_idx, bounds):
    """Scale the residuals of the free points until the OLS R^2 hits target."""
    x = np.asarray(x)
    y = np.asarray(y, dtype=float)
    resid = {i: y[i] - (line_a + line_b * x[i]) for i in rest_idx}

    def r2_at(scale):
        yy = y.copy()
        for i in rest_idx:
            yy[i] = line_a + line_b * x[i] + resid[i] * scale
            yy[i] = min(bounds[1], max(bounds[0], yy[i]))
        xd = x - x.mean()
        sxx = (xd * xd).sum()
        slope = (xd * (yy - yy.mean())).sum() / sxx
        inter = yy.mean() - slope * x.mean()
        rr = yy - (inter + slope * x)
        return 1 - (rr * rr).sum() / ((yy - yy.mean()) ** 2).sum(), yy

    lo, hi = 0.05, 6.0
    for _ in range(60):
        mid = (lo + hi) / 2
        r2, _ = r2_at(mid)
        if r2 > target:
            lo = mid
        else:
            hi = mid
    r2, yy = r2_at((lo + hi) / 2)
    return yy, r2


def main():
    targets = load_targets()["familiarity"]
    rng = random.Random(880_001)
    inventory = AffixInventory.bundled()

    n_total = targets["n_total"]
    n_cl = targets["n_complex_low"]
    n_sl = targets["n_simplex_low"]
    n_complex_total = targets["n_complex_total"]
    n_low = n_cl + n_sl
    n_high = n_total - n_low
    n_ch = n_complex_total - n_cl
    n_sh = n_high - n_ch

    print("generating word forms (parse-consistent)...")
    complex_words, simplex_words = generate_words(
        rng, inventory, n_complex_total, n_total - n_complex_total
    )

    # frequencies: exact group sums below the cutoff, long tail above
    sum_cl = round(targets["mean_freq_complex"] * n_cl)
    sum_sl = round(targets["mean_freq_simplex"] * n_sl)
    assert abs(sum_cl / n_cl - targets["mean_freq_complex"]) < 0.05
    assert abs(sum_sl / n_sl - targets["mean_freq_simplex"]) < 0.05
    f_cl = split_frequencies(rng, n_cl, sum_cl, 1, 9_999)
    f_sl = split_frequencies(rng, n_sl, sum_sl, 1, 9_999)
    f_ch = [min(3_000_000, int(10_000 * rng.paretovariate(0.9))) for _ in range(n_ch)]
    f_sh = [min(3_000_000, int(10_000 * rng.paretovariate(0.9))) for _ in range(n_sh)]

    words = []
    words += [(w, f, True, True) for w, f in zip(complex_words[:n_cl], f_cl)]
    words += [(w, f, False, True) for w, f in zip(simplex_words[:n_sl], f_sl)]
    words += [(w, f, True, False) for w, f in zip(complex_words[n_cl:], f_ch)]
    words += [(w, f, False, False) for w, f in zip(simplex_words[n_sl:], f_sh)]
    logf = np.array([math.log10(max(f, 1)) for _, f, _, _ in words])

    # familiarity: exact moments in the low-frequency groups
    s1, s2, delta, df_check = solve_group_sds(
        targets["welch_familiarity_t"], targets["welch_familiarity_df"],
        n_cl, n_sl, scale=0.72,
    )
    mean_low_line = 4.30
    m2 = mean_low_line - delta / 2
    m1 = m2 + delta
    fam = np.zeros(n_total)
    fam[:n_cl] = exact_moment_sample(rng, n_cl, m1, s1)
    fam[n_cl:n_low] = exact_moment_sample(rng, n_sl, m2, s2)
    line_b, line_a = 0.55, 2.30
    rest_idx = list(range(n_low, n_total))
    for i in rest_idx:
        fam[i] = line_a + line_b * logf[i] + rng.gauss(0, 0.9)
    fam, r2_fam = tune_r2(
        logf, None, fam, targets["r2_familiarity_logfreq"], rng,
        line_a, line_b, rest_idx, bounds=(1.0, 7.0),
    )
    print(f"familiarity: groups d={delta:.3f} df={df_check:.1f}, R2={r2_fam:.4f}")

    # log-probabilities: same construction with its own moments
    s1p, s2p, dp, dfp = solve_group_sds(
        targets["welch_logp_t"], targets["welch_logp_df"], n_cl, n_sl, scale=1.85
    )
    lp_line_b, lp_line_a = 2.46, -20.0
    lp_mean_low = lp_line_a + lp_line_b * float(logf[:n_low].mean())
    lm2 = lp_mean_low - dp / 2
    lm1 = lm2 + dp
    logp = np.zeros(n_total)
    logp[:n_cl] = exact_moment_sample(rng, n_cl, lm1, s1p, trend=logf[:n_cl])
    logp[n_cl:n_low] = exact_moment_sample(rng, n_sl, lm2, s2p, trend=logf[n_cl:n_low])
    for i in rest_idx:
        logp[i] = lp_line_a + lp_line_b * logf[i] + rng.gauss(0, 1.4)
    logp, r2_lp = tune_r2(
        logf, None, logp, targets["r2_logp_logfreq"], rng,
        lp_line_a, lp_line_b, rest_idx, bounds=(-34.0, -0.8),
    )
    print(f"logp: groups d={dp:.3f} df={dfp:.1f}, R2={r2_lp:.4f}")

    vocab_prompts = [p.id for p in load_prompts() if p.kind == "VOCAB"]
    records = []
    for i, (w, f, is_complex, _low) in enumerate(words):
        for pid in vocab_prompts:
            records.append(
                VocabRecord(
                    word=w,
                    prompt_id=pid,
                    logp=float(logp[i]) + PROMPT_OFFSETS[pid],
                    frequency=f,
                    familiarity=float(np.clip(fam[i], 1.0, 7.0)),
                    is_complex=is_complex,
                )
            )
    save_vocab_records(records, FIXTURES / "vocab_familiarity.jsonl.gz")
    print(f"wrote {len(records)} vocabulary records")

    from ityness.evaluation import familiarity_analysis, load_vocab_records

    rep = familiarity_analysis(load_vocab_records(FIXTURES / "vocab_familiarity.jsonl.gz"))
    print(
        f"verify: famil t={rep.welch_familiarity[0]:.2f} df={rep.welch_familiarity[1]:.1f}; "
        f"logp t={rep.welch_logp[0]:.2f} df={rep.welch_logp[1]:.1f}; "
        f"R2 famil={rep.r2_familiarity_logfreq:.4f} logp={rep.r2_logp_logfreq:.4f}; "
        f"means {rep.mean_freq_complex:.1f}/{rep.mean_freq_simplex:.1f}; "
        f"n={rep.n_complex}/{rep.n_simplex}/{rep.n_total}"
    )
    assert rep.n_complex == n_cl and rep.n_simplex == n_sl and rep.n_total == n_total
    assert abs(rep.welch_familiarity[0] - targets["welch_familiarity_t"]) / targets["welch_familiarity_t"] < 0.01
    assert abs(rep.welch_familiarity[1] - targets["welch_familiarity_df"]) / targets["welch_familiarity_df"] < 0.01
    assert abs(rep.welch_logp[0] - targets["welch_logp_t"]) / abs(targets["welch_logp_t"]) < 0.01
    assert abs(rep.welch_logp[1] - targets["welch_logp_df"]) / targets["welch_logp_df"] < 0.01
    assert abs(rep.r2_familiarity_logfreq - targets["r2_familiarity_logfreq"]) < 0.005
    assert abs(rep.r2_logp_logfreq - targets["r2_logp_logfreq"]) < 0.005
    assert abs(rep.mean_freq_complex - targets["mean_freq_complex"]) < 0.05
    assert abs(rep.mean_freq_simplex - targets["mean_freq_simplex"]) < 0.05
    print("vocabulary fixture verified")


if __name__ == "__main__":
    main()
