"""Stage 2: nonce probe records and forced-choice preferences.

Solves per-item winner counts against the trained model predictions so that
every accuracy cell of the model-match and human-match tables comes out at
its reference value, expands the counts into per-prompt records with
synthetic log-probabilities, and writes the GPT-4-style preference fixture.
"""

from __future__ import annotations

import json
import pathlib
import random
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from fixgen.modeling import ModelBench
from fixgen.solver import mcnemar_for_pair, solve_g, solve_k

from ityness.corpus import load_lexicon
from ityness.evaluation import (
    PreferenceRecord,
    ProbeRecord,
    load_prompts,
    save_preference_records,
    save_probe_records,
)
from ityness.gcm import DEFAULT_SENSITIVITY_TOKEN, DEFAULT_SENSITIVITY_TYPE
from ityness.morphlex import AdjectiveClass, Base, SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS
REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
MODEL_NAMES = ("mgl_type", "mgl_token", "gcm_type", "gcm_token")


def load_reference():
    from importlib import resources

    raw = resources.files("ityness.data").joinpath("reference_targets.json").read_text("utf-8")
    return json.loads(raw)


def main():
    ref = load_reference()
    sidecar = json.loads((FIXTURES / "nonce_targets.json").read_text("utf-8"))
    entries = load_lexicon(FIXTURES / "lexicon_pile.tsv.gz")
    bench = ModelBench(entries, DEFAULT_SENSITIVITY_TYPE, DEFAULT_SENSITIVITY_TOKEN)

    nonces: dict[str, list[str]] = {}
    from fixgen.lexicon import load_nonces

    nonces = load_nonces()
    human: dict[str, SuffixChoice] = {}
    for t in sidecar["targets"]:
        human[t["item"]] = SuffixChoice.parse(t["human"])
    for f in nonces["able"]:
        human[f] = I
    for f in nonces["ish"]:
        human[f] = N

    # model predictions on all 200 items
    all_items = sorted(f for forms in nonces.values() for f in forms)
    dmat = bench.distances(all_items)
    g_type, g_token = bench.gcm_margins(dmat)
    p_t, p_k, _, _ = bench.mgl_predictions(all_items)
    preds = {}
    for idx, q in enumerate(all_items):
        preds[q] = {
            "mgl_type": p_t[idx],
            "mgl_token": p_k[idx],
            "gcm_type": I if g_type[idx] >= 0 else N,
            "gcm_token": I if g_token[idx] >= 0 else N,
        }

    k_by_item: dict[str, int] = {}
    g_by_item: dict[str, SuffixChoice] = {}
    for cls in ("able", "ish", "ive", "ous"):
        label = "-" + cls
        items = sorted(nonces[cls])
        models = {m: [preds[q][m] for q in items] for m in MODEL_NAMES}
        hvec = [human[q] for q in items]
        n = len(items)

        mm = ref["nonce_model_match"][label]
        hm = ref["human_match"][label]
        gm = ref["gpt4_model_match"][label]
        model_targets = {m: round(mm[m] * n * 12) for m in MODEL_NAMES}
        human_target = round(hm["gptj"] * n * 12)
        g_model_targets = {m: round(gm[m] * n) for m in MODEL_NAMES}
        g_human_target = round(hm["gpt4"] * n)
        daggers = set(ref["nonce_daggers"].get(label, ()))
        best_model = max(MODEL_NAMES, key=lambda m: mm[m])

        pinned = {}
        if cls == "ish":
            # exactly two ity winners, on turgeish and prienish
            for j, q in enumerate(items):
                pinned[j] = 1 if q in ("turgeish", "prienish") else 0
        if cls == "ive":
            pinned[items.index("pepulative")] = 2

        k = solve_k(
            models, hvec, model_targets, human_target, daggers, best_model,
            pinned, seed=1234 + len(cls),
        )
        g = solve_g(models, hvec, g_model_targets, g_human_target, seed=4321 + len(cls))

        for m in MODEL_NAMES:
            acc = sum(
                ki if models[m][j] is I else 12 - ki for j, ki in enumerate(k)
            ) / (n * 12)
            assert abs(acc - mm[m]) < 5e-4, (cls, m, acc)
            if m != best_model:
                p = mcnemar_for_pair(k, models[m], models[best_model])
                assert (p < 0.05) == (m in daggers), (cls, m, p)
            g_acc = sum(1 for j in range(n) if g[j] is models[m][j]) / n
            assert abs(g_acc - gm[m]) < 5e-4, (cls, m, g_acc)
        h_acc_models = {
            m: sum(1 for j in range(n) if hvec[j] is models[m][j]) / n
            for m in MODEL_NAMES
        }
        for m in MODEL_NAMES:
            assert abs(h_acc_models[m] - hm[m]) < 5e-4, (cls, m, h_acc_models[m])

        for j, q in enumerate(items):
            k_by_item[q] = k[j]
            g_by_item[q] = g[j]
        print(f"{label}: winner counts and preferences solved")

    # expand counts to per-prompt records with synthetic log-probabilities
    prompts = [p.id for p in load_prompts() if p.kind == "NOMINALIZE"]
    rng = random.Random(99_1234)
    records = []
    prefs = []
    for q in all_items:
        base = Base.from_form(q)
        k = k_by_item[q]
        if q in ("turgeish", "prienish"):
            ity_prompts = {"p08"}
        else:
            ity_prompts = set(rng.sample(prompts, k))
        for pid in prompts:
            winner_is_ity = pid in ity_prompts
            level = -rng.uniform(6.0, 20.0)
            gap = rng.uniform(0.7, 6.0)
            logp_win = level
            logp_lose = level - gap
            records.append(
                ProbeRecord(
                    base=base,
                    prompt_id=pid,
                    logp_ity=logp_win if winner_is_ity else logp_lose,
                    logp_ness=logp_lose if winner_is_ity else logp_win,
                    model_id="gptj",
                )
            )
        prefs.append(PreferenceRecord(base=base, choice=g_by_item[q], model_id="gpt4"))

    save_probe_records(records, FIXTURES / "probes_nonce.jsonl.gz")
    save_preference_records(prefs, FIXTURES / "preferences_gpt4.jsonl")
    sidecar["human_majority"] = {q: human[q].suffix for q in all_items}
    (FIXTURES / "nonce_targets.json").write_text(
        json.dumps(sidecar, indent=1, sort_keys=True), encoding="utf-8"
    )
    print(f"wrote {len(records)} probe records, {len(prefs)} preferences")


if __name__ == "__main__":
    main()
