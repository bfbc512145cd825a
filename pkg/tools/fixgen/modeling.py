"""Train the four models on a candidate lexicon and check nonce targets."""

from __future__ import annotations

import numpy as np

from ityness import gcm, mgl
from ityness.corpus import LexiconEntry
from ityness.morphlex import AdjectiveClass, Base, SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS


def rows_to_entries(rows) -> list[LexiconEntry]:
    return [
        LexiconEntry(Base(form, AdjectiveClass.parse(cls)), bc, ity, ness)
        for form, cls, bc, ity, ness in rows
    ]


class ModelBench:
    """Holds both MGL models plus GCM weight vectors over one exemplar set."""

    def __init__(self, entries, sensitivity, sensitivity_token=None):
        self.entries = entries
        self.sensitivity = sensitivity
        self.sensitivity_token = sensitivity_token or sensitivity
        self.mgl_type = mgl.train(mgl.items_from_lexicon(entries, "type"), mode="type")
        self.mgl_token = mgl.train(mgl.items_from_lexicon(entries, "token"), mode="token")
        ex_type = gcm.exemplars_from_lexicon(entries, "type")
        self.gcm_model = gcm.GcmModel(ex_type, sensitivity=sensitivity)
        token_w = []
        for e in entries:
            if e.ity_count > 0:
                token_w.append(float(e.ity_count))
            if e.ness_count > 0:
                token_w.append(float(e.ness_count))
        self.w_type = self.gcm_model._weights
        self.w_token = np.asarray(token_w)
        self.is_ity = self.gcm_model._is_ity

    def distances(self, queries: list[str]) -> np.ndarray:
        return np.vstack([self.gcm_model.distances(q) for q in queries])

    def gcm_margins(self, dmat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """log(S_ity) - log(S_ness) per query for type and token weights."""
        out = []
        for w, c in ((self.w_type, self.sensitivity), (self.w_token, self.sensitivity_token)):
            sim = np.exp(-c * dmat)
            s_i = (sim * (w * self.is_ity)).sum(axis=1)
            s_n = (sim * (w * ~self.is_ity)).sum(axis=1)
            out.append(np.log(s_i) - np.log(s_n))
        return out[0], out[1]

    def mgl_predictions(self, queries: list[str]):
        preds_t, preds_k, conf_t, conf_k = [], [], [], []
        for q in queries:
            pt = mgl.predict(self.mgl_type, q)
            pk = mgl.predict(self.mgl_token, q)
            preds_t.append(pt.choice)
            preds_k.append(pk.choice)
            conf_t.append(pt.best)
            conf_k.append(pk.best)
        return preds_t, preds_k, conf_t, conf_k


def report_mismatches(queries, want, got, label):
    bad = []
    for q, w, g in zip(queries, want, got):
        if w is not g:
            bad.append((q, w.suffix, g.suffix))
    if bad:
        print(f"  {label}: {len(bad)} mismatches")
        for q, w, g in bad[:12]:
            print(f"    {q}: want {w}, got {g}")
    return bad
