"""Acceptance suite: one test per exit criterion, each at its stated
tolerance, printing a pass line when it holds. Run with `pytest -v
tests/test_acceptance.py` (add -s to see the lines as they print)."""

import json
import math
import random
import subprocess
import sys
import time
from importlib import resources

import numpy as np
import pytest

from ityness import gcm, mgl, noncegen
from ityness.corpus import FrequencyTable, load_lexicon
from ityness.evaluation import (
    accuracy,
    annotation_matrix,
    annotator_class_correlation,
    entropy_confidence_correlation,
    frequency_buckets,
    load_annotations,
    load_probe_records,
    ratio_correlation,
)
from ityness.morphlex import AdjectiveClass, Base, SuffixChoice
from ityness.stats import fleiss_kappa, gwet_ac1, holm_bonferroni, shannon_entropy

I, N = SuffixChoice.ITY, SuffixChoice.NESS


def targets():
    raw = resources.files("ityness.data").joinpath("reference_targets.json").read_text("utf-8")
    return json.loads(raw)


TARGETS = targets()


@pytest.fixture(scope="session")
def lexicon(fixtures_dir):
    return load_lexicon(fixtures_dir / "lexicon_pile.tsv.gz")


@pytest.fixture(scope="session")
def bundled_nonces():
    raw = resources.files("ityness.data").joinpath("nonce_adjectives.tsv").read_text("utf-8")
    out = {}
    for line in raw.splitlines():
        form, cls = line.split("\t")
        out.setdefault(cls, []).append(Base.from_form(form))
    return out


@pytest.fixture(scope="session")
def trained_models(lexicon):
    t0 = time.time()
    models = {
        "mgl_type": mgl.train(mgl.items_from_lexicon(lexicon, "type"), "type"),
        "mgl_token": mgl.train(mgl.items_from_lexicon(lexicon, "token"), "token"),
        "gcm_type": gcm.GcmModel(
            gcm.exemplars_from_lexicon(lexicon, "type"), gcm.DEFAULT_SENSITIVITY_TYPE
        ),
        "gcm_token": gcm.GcmModel(
            gcm.exemplars_from_lexicon(lexicon, "token"), gcm.DEFAULT_SENSITIVITY_TOKEN
        ),
    }
    return models, time.time() - t0


def test_gcm_oracle_equivalence():
    """500 random small instances agree with direct summation to 1e-9, <5s."""
    rng = random.Random(20_240_915)
    t0 = time.time()
    for _ in range(500):
        n = rng.randint(2, 8)
        exemplars = []
        for i in range(n):
            form = "".join(rng.choice("abcde") for _ in range(rng.randint(1, 8)))
            choice = rng.choice((I, N))
            exemplars.append(gcm.Exemplar(form, choice, rng.uniform(0.1, 40.0)))
        exemplars[0] = gcm.Exemplar(exemplars[0].form, I, exemplars[0].weight)
        exemplars[-1] = gcm.Exemplar(exemplars[-1].form, N, exemplars[-1].weight)
        query = "".join(rng.choice("abcde") for _ in range(rng.randint(0, 6)))
        c = rng.uniform(0.1, 5.0)
        model = gcm.GcmModel(exemplars, c)
        got = gcm.score(model, query)
        sums = {I: 0.0, N: 0.0}
        for e in exemplars:
            sums[e.choice] += e.weight * math.exp(-c * gcm.distance(query, e.form))
        total = sums[I] + sums[N]
        assert abs(got[I] - sums[I] / total) < 1e-9
        assert abs(got[N] - sums[N] / total) < 1e-9
    elapsed = time.time() - t0
    assert elapsed < 5.0, f"oracle sweep took {elapsed:.1f}s"
    print(f"\nACCEPTANCE gcm-oracle-equivalence: PASS ({elapsed:.1f}s)")


def test_regular_class_reproduction(trained_models, bundled_nonces):
    """All bundled -able nonces predict ity and -ish predict ness, every
    model, both modes, exactly; end to end under 60s."""
    models, train_time = trained_models
    t0 = time.time()
    for label, want in (("-able", I), ("-ish", N)):
        bases = bundled_nonces[label]
        assert len(bases) == 50
        for base in bases:
            assert mgl.predict(models["mgl_type"], base).choice is want, (label, base.form)
            assert mgl.predict(models["mgl_token"], base).choice is want, (label, base.form)
            assert gcm.predict(models["gcm_type"], base) is want, (label, base.form)
            assert gcm.predict(models["gcm_token"], base) is want, (label, base.form)
    elapsed = train_time + (time.time() - t0)
    assert elapsed < 60.0, f"regularity run took {elapsed:.1f}s"
    print(f"\nACCEPTANCE regular-class-reproduction: PASS (100% on 2x50 nonces, {elapsed:.1f}s)")


def test_mgl_confidence_formula():
    """Hand-derived confidence value and scope monotonicity sweep."""
    model = mgl.train([("selfish", N, 1.0), ("boyish", N, 1.0)])
    target = [
        r for r in model.rules
        if r.context == mgl.RuleContext(True, frozenset("fy"), "ish")
    ]
    assert len(target) == 1
    rule = target[0]
    assert rule.hits == 2 and rule.scope == 2
    assert abs(rule.confidence - 0.655) <= 1e-3

    z = mgl.z_for_alpha(0.75)
    rng = random.Random(77)
    for _ in range(1000):
        reliability = rng.uniform(0.05, 1.0)
        scope = rng.uniform(0.5, 400.0)
        k = rng.uniform(1.01, 25.0)
        low = mgl.adjusted_confidence(reliability * scope, scope, z)
        high = mgl.adjusted_confidence(reliability * scope * k, scope * k, z)
        assert high > low
    print("\nACCEPTANCE mgl-confidence-formula: PASS (0.655 +- 0.001; 1000-case sweep)")


def test_noncegen_properties(fixtures_dir, lexicon):
    """Byte-identical across three runs; every constraint holds; <10s."""
    t0 = time.time()
    freq = FrequencyTable.load(fixtures_dir / "freq_table.tsv.gz")
    words = [e.base.form for e in lexicon if e.base.cls is AdjectiveClass.IVE]
    model, modal = noncegen.train_bigrams(words)
    spec = noncegen.NonceSpec(
        cls=AdjectiveClass.IVE, lengths=modal, per_length=25, seed=11
    )
    runs = [
        "\n".join(b.form for b in noncegen.generate(model, spec, freq, set(words)))
        for _ in range(3)
    ]
    assert runs[0] == runs[1] == runs[2]
    out = runs[0].split("\n")
    assert len(out) == 50 and len(set(out)) == 50
    from ityness.morphlex import apply_suffix

    for form in out:
        base = Base.from_form(form)
        assert form.endswith("ive") and len(form) in set(modal)
        assert model.closed_over(form)
        assert freq[form] == 0
        assert freq[apply_suffix(base, I)] == 0
        assert freq[apply_suffix(base, N)] == 0
    elapsed = time.time() - t0
    assert elapsed < 10.0, f"noncegen run took {elapsed:.1f}s"
    print(f"\nACCEPTANCE noncegen-properties: PASS (3 identical runs, 50/50 constrained, {elapsed:.1f}s)")


def test_stats_validation(fixtures_dir):
    """Exact closed-form checks plus the annotation fixture statistics."""
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    assert holm_bonferroni([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])

    annotations = load_annotations(fixtures_dir / "annotations.tsv")
    agree = TARGETS["agreement"]
    kappa = fleiss_kappa(annotation_matrix(annotations))
    assert abs(kappa - agree["fleiss_kappa"]) <= 0.005
    for label, want in agree["gwet_ac1"].items():
        got = gwet_ac1(annotation_matrix(annotations, AdjectiveClass.parse(label)))
        assert abs(got - want) <= 0.005, (label, got)
    c_ai = annotator_class_correlation(annotations, AdjectiveClass.ABLE, AdjectiveClass.IVE)
    c_io = annotator_class_correlation(annotations, AdjectiveClass.IVE, AdjectiveClass.OUS)
    assert abs(c_ai - agree["annotator_corr_able_ive"]) <= 0.005
    assert abs(c_io - agree["annotator_corr_ive_ous"]) <= 0.005
    print(
        f"\nACCEPTANCE stats-validation: PASS (kappa {kappa:.3f}, "
        f"AC1 x4 within 0.005, correlations {c_ai:.3f}/{c_io:.3f})"
    )


def test_eval_fixture_reproduction(fixtures_dir, lexicon):
    """Seen-probe aggregates land on the reference values."""
    probes = load_probe_records(fixtures_dir / "probes_seen.jsonl.gz")
    reference = {e.base.form: e.preferred for e in lexicon}
    mean, std, _ = accuracy(probes, reference)
    want = TARGETS["seen_overall"]
    assert abs(mean - want["mean"]) <= 0.002
    assert abs(std - want["std"]) <= 0.002

    from collections import defaultdict

    by_class = defaultdict(list)
    for r in probes:
        by_class[r.base.cls.label].append(r)
    for label, cell in TARGETS["seen_accuracy"].items():
        m_c, _s, _ = accuracy(by_class[label], reference)
        assert abs(m_c - cell["mean"]) <= 0.01, (label, m_c)

    rc = ratio_correlation(lexicon, probes)
    want_rc = TARGETS["ratio_correlation"]
    assert abs(rc.mean_r - want_rc["mean"]) <= 0.002
    assert abs(rc.std_r - want_rc["std"]) <= 0.0015
    assert all(p < 0.001 for p in rc.adjusted_p.values())

    buckets = frequency_buckets(lexicon, probes)
    assert all(b.relative_increase > 0 for b in buckets.values())
    _r, r2, p = entropy_confidence_correlation(lexicon, buckets)
    assert abs(r2 - TARGETS["entropy_confidence_r2"]) <= 0.02
    assert p < 0.001
    print(
        f"\nACCEPTANCE eval-fixture-reproduction: PASS "
        f"(accuracy {mean:.3f}+-{std:.3f}, r {rc.mean_r:.4f}+-{rc.std_r:.4f}, "
        f"r2 {r2:.3f}, all {len(buckets)} increases positive)"
    )


def test_nonce_table_reproduction(fixtures_dir, lexicon, trained_models, bundled_nonces):
    """Model-match accuracies on the nonce probes land on the reference
    table, including the significance marks."""
    from ityness.evaluation import winner
    from ityness.stats import mcnemar_exact

    models, _ = trained_models
    probes = load_probe_records(fixtures_dir / "probes_nonce.jsonl.gz")
    from collections import defaultdict

    by_class = defaultdict(list)
    for r in probes:
        by_class[r.base.cls.label].append(r)
    for label, cells in TARGETS["nonce_model_match"].items():
        recs = by_class[label]
        preds = {}
        for name in ("mgl_type", "mgl_token"):
            preds[name] = {
                b.form: mgl.predict(models[name], b).choice for b in bundled_nonces[label]
            }
        for name in ("gcm_type", "gcm_token"):
            preds[name] = {
                b.form: gcm.predict(models[name], b) for b in bundled_nonces[label]
            }
        accs = {}
        matches = {}
        for name, want in cells.items():
            mean, _s, _ = accuracy(recs, preds[name])
            accs[name] = mean
            matches[name] = [winner(r) is preds[name][r.base.form] for r in recs]
            assert abs(mean - want) <= 0.0005, (label, name, mean)
        best = max(accs, key=accs.get)
        for name in accs:
            if name == best:
                continue
            p = mcnemar_exact(matches[name], matches[best])
            significant = p < 0.05
            assert significant == (name in TARGETS["nonce_daggers"].get(label, [])), (
                label, name, p,
            )
    print("\nACCEPTANCE nonce-table-reproduction: PASS (16 cells +-0.0005, marks exact)")


def test_familiarity_reproduction(fixtures_dir):
    from ityness.evaluation import familiarity_analysis, load_vocab_records

    rep = familiarity_analysis(load_vocab_records(fixtures_dir / "vocab_familiarity.jsonl.gz"))
    want = TARGETS["familiarity"]
    assert abs(rep.welch_familiarity[0] - want["welch_familiarity_t"]) / want["welch_familiarity_t"] <= 0.01
    assert abs(rep.welch_familiarity[1] - want["welch_familiarity_df"]) / want["welch_familiarity_df"] <= 0.01
    assert abs(rep.welch_logp[0] - want["welch_logp_t"]) / abs(want["welch_logp_t"]) <= 0.01
    assert abs(rep.welch_logp[1] - want["welch_logp_df"]) / want["welch_logp_df"] <= 0.01
    assert abs(rep.r2_familiarity_logfreq - want["r2_familiarity_logfreq"]) <= 0.005
    assert abs(rep.r2_logp_logfreq - want["r2_logp_logfreq"]) <= 0.005
    print(
        f"\nACCEPTANCE familiarity-reproduction: PASS "
        f"(t {rep.welch_familiarity[0]:.1f}/df {rep.welch_familiarity[1]:.1f}, "
        f"t {rep.welch_logp[0]:.1f}/df {rep.welch_logp[1]:.1f}, "
        f"R2 {rep.r2_familiarity_logfreq:.3f}/{rep.r2_logp_logfreq:.3f})"
    )


def test_end_to_end_pipeline(mini_dir, tmp_path):
    """count -> extract -> nonce -> train -> predict -> eval on the bundled
    synthetic corpus, under 30s, byte-identical across two runs."""

    def run_pipeline(out_root):
        out_root.mkdir(parents=True, exist_ok=True)
        env_cmd = [sys.executable, "-m", "ityness.cli"]

        def run(*argv):
            proc = subprocess.run(
                env_cmd + list(argv), capture_output=True, text=True
            )
            assert proc.returncode == 0, proc.stderr + proc.stdout
            return proc

        freq = out_root / "freq.tsv"
        lex = out_root / "lexicon.tsv"
        nonce = out_root / "nonce.tsv"
        run("count", "--corpus", str(mini_dir / "corpus.txt.gz"),
            "--format", "text", "--out", str(freq))
        run("extract", "--freq", str(freq), "--out", str(lex))
        run("nonce", "--lexicon", str(lex), "--class=ish", "--count", "10",
            "--corpus-freq", str(freq), "--seed", "5", "--out", str(nonce))
        run("mgl-train", "--lexicon", str(lex), "--mode", "type",
            "--out", str(out_root / "mgl.tsv"))
        run("gcm-train", "--lexicon", str(lex), "--mode", "token",
            "--out", str(out_root / "gcm.tsv"))
        run("mgl-predict", "--model", str(out_root / "mgl.tsv"), "--in", str(nonce),
            "--out", str(out_root / "mgl_pred.tsv"))
        run("gcm-predict", "--model", str(out_root / "gcm.tsv"), "--in", str(nonce),
            "--out", str(out_root / "gcm_pred.tsv"))
        run(
            "eval",
            "--lexicon", str(lex),
            "--probes", str(mini_dir / "probes_seen.jsonl"),
            "--nonce-probes", str(mini_dir / "probes_nonce.jsonl"),
            "--preferences", str(mini_dir / "preferences.jsonl"),
            "--annotations", str(mini_dir / "annotations.tsv"),
            "--vocab", str(mini_dir / "vocab.jsonl"),
            "--out", str(out_root / "report"),
        )

    t0 = time.time()
    run_pipeline(tmp_path / "run1")
    elapsed = time.time() - t0
    run_pipeline(tmp_path / "run2")

    report = tmp_path / "run1" / "report"
    names = sorted(p.name for p in report.iterdir())
    tables = [n for n in names if n.startswith("table_") and n.endswith(".csv")]
    figures = [n for n in names if n.startswith("fig_") and n.endswith(".svg")]
    assert len(tables) == 9, tables
    assert len(figures) == 5, figures

    for sub in ("freq.tsv", "lexicon.tsv", "nonce.tsv", "mgl.tsv", "gcm.tsv",
                "mgl_pred.tsv", "gcm_pred.tsv"):
        a = (tmp_path / "run1" / sub).read_bytes()
        b = (tmp_path / "run2" / sub).read_bytes()
        assert a == b, f"{sub} differs between runs"
    for name in names:
        a = (tmp_path / "run1" / "report" / name).read_bytes()
        b = (tmp_path / "run2" / "report" / name).read_bytes()
        assert a == b, f"report/{name} differs between runs"
    assert elapsed < 30.0, f"pipeline took {elapsed:.1f}s"
    print(
        f"\nACCEPTANCE end-to-end-pipeline: PASS "
        f"({len(tables)} tables, {len(figures)} figures, {elapsed:.1f}s, byte-identical)"
    )
