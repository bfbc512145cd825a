"""Full analysis report: every comparison table and figure, plus a manifest.

All outputs are deterministic functions of the inputs and configuration:
CSV for tables, hand-rolled SVG for figures, and a JSON manifest carrying
the resolved configuration and input digests (no timestamps).
"""

from __future__ import annotations

import json
import math
import pathlib
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import __version__, gcm, mgl
from .corpus import LexiconEntry, class_stats
from .errors import InputError
from .errors import UndefinedStatisticError
from .evaluation import (
    AnnotationRecord,
    PreferenceRecord,
    ProbeRecord,
    VocabRecord,
    accuracy,
    annotation_matrix,
    annotator_class_correlation,
    class_entropy,
    entropy_confidence_correlation,
    familiarity_analysis,
    frequency_buckets,
    human_majority,
    lexicon_ness_shares,
    probe_ness_ratios,
    ratio_correlation,
    winner,
)
from .ioutil import sha256_file
from .morphlex import AdjectiveClass, SuffixChoice
from .stats import fleiss_kappa, gwet_ac1, lowess, mcnemar_exact
from .svgplot import Panel, bar_panel, scatter_panel, write_figure

I, N = SuffixChoice.ITY, SuffixChoice.NESS
LN10 = math.log(10.0)
MODEL_NAMES = ("mgl_type", "mgl_token", "gcm_type", "gcm_token")
NONCE_CLASSES = ("-able", "-ish", "-ive", "-ous")
GROUP_COLORS = {
    "r-ness": "#2e7d32",
    "r-ity": "#1565c0",
    "v-ness": "#ef6c00",
    "v-ity": "#ab47bc",
}


@dataclass
class ReportConfig:
    alpha: float = mgl.DEFAULT_ALPHA
    sensitivity_type: float = gcm.DEFAULT_SENSITIVITY_TYPE
    sensitivity_token: float = gcm.DEFAULT_SENSITIVITY_TOKEN
    seed: int = 0

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "sensitivity_type": self.sensitivity_type,
            "sensitivity_token": self.sensitivity_token,
            "seed": self.seed,
        }


@dataclass
class ReportInputs:
    lexicon: Sequence[LexiconEntry]
    seen_probes: Optional[Sequence[ProbeRecord]] = None
    nonce_probes: Optional[Sequence[ProbeRecord]] = None
    preferences: Optional[Sequence[PreferenceRecord]] = None
    annotations: Optional[Sequence[AnnotationRecord]] = None
    vocab: Optional[Sequence[VocabRecord]] = None
    paths: dict = field(default_factory=dict)


def train_models(entries, config: ReportConfig):
    models = {
        "mgl_type": mgl.train(mgl.items_from_lexicon(entries, "type"), "type", config.alpha),
        "mgl_token": mgl.train(mgl.items_from_lexicon(entries, "token"), "token", config.alpha),
        "gcm_type": gcm.GcmModel(
            gcm.exemplars_from_lexicon(entries, "type"), config.sensitivity_type
        ),
        "gcm_token": gcm.GcmModel(
            gcm.exemplars_from_lexicon(entries, "token"), config.sensitivity_token
        ),
    }
    return models


def model_nonce_predictions(models, bases):
    preds = {name: {} for name in MODEL_NAMES}
    for base in bases:
        preds["mgl_type"][base.form] = mgl.predict(models["mgl_type"], base).choice
        preds["mgl_token"][base.form] = mgl.predict(models["mgl_token"], base).choice
        preds["gcm_type"][base.form] = gcm.predict(models["gcm_type"], base)
        preds["gcm_token"][base.form] = gcm.predict(models["gcm_token"], base)
    return preds


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(v, nd=3):
    return f"{v:.{nd}f}"


class ReportBuilder:
    def __init__(self, inputs: ReportInputs, config: ReportConfig, out_dir):
        self.inputs = inputs
        self.config = config
        self.out = pathlib.Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.metrics: dict = {}

    def _emit_csv(self, name, header, rows):
        path = self.out / name
        _write_csv(path, header, rows)
        self.outputs.append(name)

    def _emit_figure(self, name, panels, per_row=3):
        path = self.out / name
        write_figure(path, panels, per_row)
        self.outputs.append(name)

    # -- tables -------------------------------------------------------------

    def table_class_stats(self):
        stats = class_stats(self.inputs.lexicon)
        path = self.out / "table_class_stats.csv"
        stats.to_csv(path)
        self.outputs.append("table_class_stats.csv")

    def table_nonce_model_match(self, preds):
        probes = self.inputs.nonce_probes
        by_class = defaultdict(list)
        for r in probes:
            by_class[r.base.cls.label].append(r)
        rows = []
        for label in NONCE_CLASSES:
            recs = by_class.get(label)
            if not recs:
                continue
            accs = {}
            matches = {}
            for name in MODEL_NAMES:
                reference = preds[name]
                mean, _std, _ = accuracy(recs, reference)
                accs[name] = mean
                matches[name] = [winner(r) is reference[r.base.form] for r in recs]
            best = max(MODEL_NAMES, key=lambda m: accs[m])
            row = [label]
            for name in MODEL_NAMES:
                mark = ""
                if name != best:
                    p = mcnemar_exact(matches[name], matches[best])
                    if p < 0.05:
                        mark = "*"
                row.append(_fmt(accs[name]) + mark)
            rows.append(row)
            self.metrics.setdefault("nonce_model_match", {})[label] = {
                m: round(accs[m], 4) for m in MODEL_NAMES
            }
        self._emit_csv(
            "table_nonce_model_match.csv",
            ["class", "mgl_type", "mgl_token", "gcm_type", "gcm_token"],
            rows,
        )

    def table_seen_accuracy(self):
        probes = self.inputs.seen_probes
        reference = {
            e.base.form: e.preferred
            for e in self.inputs.lexicon
        }
        by_class = defaultdict(list)
        for r in probes:
            by_class[r.base.cls.label].append(r)
        rows = []
        for label in sorted(by_class):
            mean, std, _ = accuracy(by_class[label], reference)
            rows.append([label, _fmt(mean), _fmt(std)])
            self.metrics.setdefault("seen_accuracy", {})[label] = round(mean, 4)
        mean, std, _ = accuracy(probes, reference)
        rows.append(["overall", _fmt(mean), _fmt(std)])
        self.metrics["seen_accuracy_overall"] = {"mean": round(mean, 4), "std": round(std, 4)}
        self._emit_csv(
            "table_seen_accuracy.csv", ["class", "accuracy_mean", "accuracy_std"], rows
        )

    def table_ratio_correlation(self):
        rc = ratio_correlation(self.inputs.lexicon, self.inputs.seen_probes)
        rows = [
            [p, _fmt(rc.per_prompt_r[p], 4), f"{rc.per_prompt_p[p]:.3e}", f"{rc.adjusted_p[p]:.3e}"]
            for p in sorted(rc.per_prompt_r)
        ]
        rows.append(["mean", _fmt(rc.mean_r, 4), "", ""])
        rows.append(["std", _fmt(rc.std_r, 4), "", ""])
        self.metrics["ratio_correlation"] = {
            "mean": round(rc.mean_r, 4),
            "std": round(rc.std_r, 4),
        }
        self._emit_csv(
            "table_ratio_correlation.csv",
            ["prompt", "pearson_r", "p_value", "p_holm"],
            rows,
        )

    def table_frequency_buckets(self):
        buckets = frequency_buckets(self.inputs.lexicon, self.inputs.seen_probes)
        rows = []
        for (cls, prompt), b in sorted(
            buckets.items(), key=lambda kv: (kv[0][0].suffix, kv[0][1])
        ):
            rows.append(
                [
                    cls.label,
                    prompt,
                    _fmt(b.delta_low / LN10, 3),
                    _fmt(b.delta_high / LN10, 3),
                    _fmt(b.relative_increase, 2),
                    str(b.n_low),
                    str(b.n_high),
                ]
            )
        self._emit_csv(
            "table_frequency_buckets.csv",
            ["class", "prompt", "delta_low_log10", "delta_high_log10",
             "relative_increase_pct", "n_low", "n_high"],
            rows,
        )
        if buckets:
            try:
                r, r2, p = entropy_confidence_correlation(self.inputs.lexicon, buckets)
                self.metrics["entropy_confidence"] = {
                    "r": round(r, 4), "r2": round(r2, 4), "p": p
                }
            except UndefinedStatisticError:
                self.metrics["entropy_confidence"] = None
            self.metrics["all_increases_positive"] = bool(
                all(b.relative_increase > 0 for b in buckets.values())
            )
        return buckets

    def table_human_match(self, preds):
        annotations = self.inputs.annotations
        summary = human_majority(annotations)
        probes = self.inputs.nonce_probes
        prefs = {p.base.form: p.choice for p in (self.inputs.preferences or ())}
        by_class = defaultdict(list)
        for r in probes:
            by_class[r.base.cls.label].append(r)
        rows = []
        for label in NONCE_CLASSES:
            recs = by_class.get(label)
            if not recs:
                continue
            forms = sorted({r.base.form for r in recs})
            ref = {f: summary.majority[f] for f in forms}
            row = [label]
            for name in MODEL_NAMES:
                agree = sum(1 for f in forms if preds[name][f] is ref[f]) / len(forms)
                row.append(_fmt(agree))
            gptj_mean, _s, _ = accuracy(recs, ref)
            row.append(_fmt(gptj_mean))
            if prefs:
                gpt4 = sum(1 for f in forms if prefs.get(f) is ref[f]) / len(forms)
                row.append(_fmt(gpt4))
            else:
                row.append("")
            rows.append(row)
            self.metrics.setdefault("human_match", {})[label] = {
                "gptj": round(gptj_mean, 4),
                "gpt4": (round(gpt4, 4) if prefs else None),
            }
        self._emit_csv(
            "table_human_match.csv",
            ["class", "mgl_type", "mgl_token", "gcm_type", "gcm_token", "gptj", "gpt4"],
            rows,
        )

    def table_gpt4_model_match(self, preds):
        prefs = {p.base.form: p.choice for p in self.inputs.preferences}
        by_class = defaultdict(list)
        for form in prefs:
            from .morphlex import classify

            by_class[classify(form).label].append(form)
        rows = []
        for label in NONCE_CLASSES:
            forms = sorted(by_class.get(label, ()))
            if not forms:
                continue
            row = [label]
            for name in MODEL_NAMES:
                agree = sum(1 for f in forms if prefs[f] is preds[name][f]) / len(forms)
                row.append(_fmt(agree))
            rows.append(row)
        self._emit_csv(
            "table_gpt4_model_match.csv",
            ["class", "mgl_type", "mgl_token", "gcm_type", "gcm_token"],
            rows,
        )

    def table_agreement(self):
        annotations = self.inputs.annotations
        rows = [["fleiss_kappa", "all", _fmt(fleiss_kappa(annotation_matrix(annotations)), 4)]]
        for label in NONCE_CLASSES:
            cls = AdjectiveClass.parse(label)
            rows.append(
                ["gwet_ac1", label, _fmt(gwet_ac1(annotation_matrix(annotations, cls)), 4)]
            )
        pairs = [
            (AdjectiveClass.ABLE, AdjectiveClass.IVE),
            (AdjectiveClass.IVE, AdjectiveClass.OUS),
        ]
        for a, b in pairs:
            r = annotator_class_correlation(self.inputs.annotations, a, b)
            rows.append(["annotator_corr", f"{a.label}/{b.label}", _fmt(r, 4)])
        self.metrics["agreement"] = {row[0] + ":" + row[1]: float(row[2]) for row in rows}
        self._emit_csv("table_agreement.csv", ["statistic", "scope", "value"], rows)

    def table_familiarity(self):
        rep = familiarity_analysis(self.inputs.vocab)
        rows = [
            ["n_complex_low_frequency", str(rep.n_complex)],
            ["n_simplex_low_frequency", str(rep.n_simplex)],
            ["n_total", str(rep.n_total)],
            ["mean_frequency_complex", _fmt(rep.mean_freq_complex, 1)],
            ["mean_frequency_simplex", _fmt(rep.mean_freq_simplex, 1)],
            ["welch_familiarity_t", _fmt(rep.welch_familiarity[0], 2)],
            ["welch_familiarity_df", _fmt(rep.welch_familiarity[1], 1)],
            ["welch_familiarity_p", f"{rep.welch_familiarity[2]:.3e}"],
            ["welch_logp_t", _fmt(rep.welch_logp[0], 2)],
            ["welch_logp_df", _fmt(rep.welch_logp[1], 1)],
            ["welch_logp_p", f"{rep.welch_logp[2]:.3e}"],
            ["r2_familiarity_logfreq", _fmt(rep.r2_familiarity_logfreq, 4)],
            ["f_familiarity_logfreq", _fmt(rep.f_familiarity_logfreq, 1)],
            ["r2_logp_logfreq", _fmt(rep.r2_logp_logfreq, 4)],
            ["f_logp_logfreq", _fmt(rep.f_logp_logfreq, 1)],
        ]
        self.metrics["familiarity"] = {k: v for k, v in rows}
        self._emit_csv("table_familiarity.csv", ["statistic", "value"], rows)
        return rep

    # -- figures ------------------------------------------------------------

    def fig_nonce_ratios(self, preds):
        probes = self.inputs.nonce_probes
        panels = []
        by_class_forms = defaultdict(set)
        for r in probes:
            by_class_forms[r.base.cls.label].add(r.base.form)
        labels = [c for c in NONCE_CLASSES if by_class_forms.get(c)]
        titles = {
            "mgl_type": "Type-weighted rule model",
            "mgl_token": "Token-weighted rule model",
            "gcm_type": "Type-weighted exemplar model",
            "gcm_token": "Token-weighted exemplar model",
        }
        for name in MODEL_NAMES:
            values = []
            for label in labels:
                forms = sorted(by_class_forms[label])
                values.append(
                    sum(1 for f in forms if preds[name][f] is N) / len(forms)
                )
            panels.append(bar_panel(titles[name], labels, values, y_label="-ness share"))
        ratios = probe_ness_ratios(probes)
        values = []
        for label in labels:
            cls_ratios = [v for (p, c), v in ratios.items() if c.label == label]
            values.append(sum(cls_ratios) / len(cls_ratios))
        panels.append(bar_panel("GPT-J probe winners", labels, values, y_label="-ness share"))
        if self.inputs.annotations:
            summary = human_majority(self.inputs.annotations)
            values = []
            for label in labels:
                forms = sorted(by_class_forms[label])
                values.append(
                    sum(1 for f in forms if summary.majority.get(f) is N) / len(forms)
                )
            panels.append(bar_panel("Human majority", labels, values, y_label="-ness share"))
        self._emit_figure("fig_nonce_ness_ratio.svg", panels)

    def fig_seen_ratios(self):
        shares = lexicon_ness_shares(self.inputs.lexicon)
        labels = sorted((c.label for c in shares), key=lambda s: s)
        panels = [
            bar_panel(
                "Training data preference",
                labels,
                [shares[AdjectiveClass.parse(c)] for c in labels],
                y_label="-ness share",
            )
        ]
        ratios = probe_ness_ratios(self.inputs.seen_probes)
        prompts = sorted({p for p, _ in ratios})
        first = prompts[0]
        values = [
            ratios.get((first, AdjectiveClass.parse(c)), 0.0) for c in labels
        ]
        panels.append(
            bar_panel(f"Probe winners ({first})", labels, values, y_label="-ness share")
        )
        self._emit_figure("fig_seen_ness_ratio.svg", panels, per_row=2)

    def fig_confidence_frequency(self, buckets):
        groups = defaultdict(list)
        for (cls, _prompt), b in buckets.items():
            groups[cls.group.value].append((b.delta_low / LN10, b.relative_increase))
        xs = [x for pts in groups.values() for x, _ in pts]
        ys = [y for pts in groups.values() for _, y in pts]
        x_range = (0.0, max(xs) * 1.08)
        y_range = (min(0.0, min(ys)) - 2.0, max(ys) * 1.1)
        series = [
            (name, GROUP_COLORS[name], sorted(pts))
            for name, pts in sorted(groups.items())
        ]
        lines = []
        for name in ("r-ness", "r-ity"):
            pts = sorted(groups.get(name, ()))
            if len(pts) >= 5:
                sm = lowess([p[0] for p in pts], [p[1] for p in pts], frac=0.7)
                lines.append((GROUP_COLORS[name], list(zip([p[0] for p in pts], sm))))
        panel = scatter_panel(
            "Confidence gain for frequent derivatives",
            series,
            x_range,
            y_range,
            x_label="low-frequency confidence (log10 units)",
            y_label="relative increase (%)",
            lines=lines,
            hline=0.0,
        )
        self._emit_figure("fig_confidence_frequency.svg", [panel], per_row=1)

    def fig_familiarity(self, rep):
        fam_means = self._fam_means("familiarity")
        panels = [
            bar_panel(
                "Human familiarity (low-frequency words)",
                ["complex", "simplex"],
                [fam_means[0], fam_means[1]],
                y_max=7.0,
                y_label="mean rating",
            ),
            bar_panel(
                "LM familiarity estimate",
                ["complex", "simplex"],
                [-self._fam_means("logp")[0], -self._fam_means("logp")[1]],
                y_max=max(1.0, -self._fam_means("logp")[0] * 1.3),
                color="#ef6c00",
                y_label="-mean log probability",
            ),
        ]
        self._emit_figure("fig_familiarity.svg", panels, per_row=2)

    def _fam_means(self, which):
        per_word = defaultdict(list)
        flags = {}
        freqs = {}
        for r in self.inputs.vocab:
            per_word[r.word].append(r)
            flags[r.word] = r.is_complex
            freqs[r.word] = r.frequency
        comp, simp = [], []
        for w, rs in per_word.items():
            if freqs[w] >= 10_000:
                continue
            if which == "familiarity":
                v = rs[0].familiarity
            else:
                v = sum(r.logp for r in rs) / len(rs)
            (comp if flags[w] else simp).append(v)
        return (sum(comp) / len(comp), sum(simp) / len(simp))

    def fig_human_variation(self):
        summary = human_majority(self.inputs.annotations)
        from .morphlex import classify

        by_class = defaultdict(list)
        for form, ratio in summary.item_ness_ratio.items():
            by_class[classify(form).label].append(ratio)
        labels = [c for c in NONCE_CLASSES if by_class.get(c)]
        pts = []
        for i, label in enumerate(labels):
            for ratio in sorted(by_class[label]):
                pts.append((i + 0.5 + (ratio - 0.5) * 0.3, ratio))
        panel_a = scatter_panel(
            "Per-item -ness share",
            [("items", "#4878a8", pts)],
            (0, len(labels)),
            (0.0, 1.0),
            x_label=" / ".join(labels),
            y_label="-ness share",
        )
        annotators = sorted({aid for aid, _ in summary.annotator_ness_ratio})
        lines = []
        for j, aid in enumerate(annotators):
            pts = []
            for i, label in enumerate(labels):
                key = (aid, AdjectiveClass.parse(label))
                if key in summary.annotator_ness_ratio:
                    pts.append((i + 0.5, summary.annotator_ness_ratio[key]))
            shade = 40 + (j * 7) % 160
            lines.append((f"#{shade:02x}{shade:02x}{shade:02x}", pts))
        panel_b = scatter_panel(
            "Per-annotator -ness share",
            [],
            (0, len(labels)),
            (0.0, 1.0),
            x_label=" / ".join(labels),
            y_label="-ness share",
            lines=lines,
        )
        self._emit_figure("fig_human_variation.svg", [panel_a, panel_b], per_row=2)

    # -- orchestration -------------------------------------------------------

    def run(self):
        inputs = self.inputs
        self.table_class_stats()
        preds = None
        if inputs.nonce_probes or inputs.preferences:
            models = train_models(inputs.lexicon, self.config)
            bases = sorted(
                {r.base for r in (inputs.nonce_probes or ())}
                | {p.base for p in (inputs.preferences or ())},
                key=lambda b: b.form,
            )
            preds = model_nonce_predictions(models, bases)
        if inputs.nonce_probes:
            self.table_nonce_model_match(preds)
            self.fig_nonce_ratios(preds)
        if inputs.seen_probes:
            self.table_seen_accuracy()
            self.table_ratio_correlation()
            buckets = self.table_frequency_buckets()
            self.fig_seen_ratios()
            if buckets:
                self.fig_confidence_frequency(buckets)
        if inputs.annotations:
            self.table_agreement()
            self.fig_human_variation()
            if inputs.nonce_probes:
                self.table_human_match(preds)
        if inputs.preferences and inputs.nonce_probes:
            self.table_gpt4_model_match(preds)
        if inputs.vocab:
            rep = self.table_familiarity()
            self.fig_familiarity(rep)
        self._emit_metrics()
        self._emit_manifest()
        return self.outputs

    def _emit_metrics(self):
        path = self.out / "metrics.json"
        path.write_text(
            json.dumps(self.metrics, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )
        self.outputs.append("metrics.json")

    def _emit_manifest(self):
        manifest = {
            "version": __version__,
            "config": self.config.as_dict(),
            "inputs": {
                name: sha256_file(p) for name, p in sorted(self.inputs.paths.items())
            },
            "outputs": sorted(self.outputs),
        }
        path = self.out / "run_manifest.json"
        path.write_text(
            json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )


def generate_report(inputs: ReportInputs, config: ReportConfig, out_dir) -> list[str]:
    if not inputs.lexicon:
        raise InputError("report needs a lexicon")
    builder = ReportBuilder(inputs, config, out_dir)
    return builder.run()
