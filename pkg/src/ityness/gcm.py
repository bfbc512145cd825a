"""Generalized Context Model: weighted exemplars, similarity-sum categorization.

Every training form is stored as an exemplar; a query is scored per category
by summing weight * exp(-c * distance) over that category's exemplars and
normalizing. Distance is plain Levenshtein over the full base string (a
length-normalized variant and a Gaussian kernel are available as switches).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import LexiconEntry
from .errors import DegenerateScoreError, InputError
from .ioutil import open_read, open_write
from .morphlex import Base, SuffixChoice

# fit_sensitivity grid optima on the bundled lexicon fixture, one per
# weighting mode; they equal default_grid()[16] and default_grid()[24]
DEFAULT_SENSITIVITY_TYPE = 1.3572088082974531
DEFAULT_SENSITIVITY_TOKEN = 5.0
DEFAULT_SENSITIVITY = DEFAULT_SENSITIVITY_TYPE


def default_sensitivity(mode: str) -> float:
    return DEFAULT_SENSITIVITY_TOKEN if mode == "token" else DEFAULT_SENSITIVITY_TYPE


class DistanceMode:
    RAW_EDIT = "raw"
    LENGTH_NORMALIZED = "norm"


class Kernel:
    EXPONENTIAL = "exp"
    GAUSSIAN = "gauss"


@dataclass(frozen=True, slots=True)
class Exemplar:
    form: str
    choice: SuffixChoice
    weight: float

    def __post_init__(self):
        if self.weight <= 0:
            raise InputError(f"exemplar weight must be positive: {self.form!r}")


def distance(a: str, b: str, mode: str = DistanceMode.RAW_EDIT) -> float:
    """Levenshtein distance, unit costs; optionally divided by max length."""
    if a == b:
        return 0.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        d = float(max(la, lb))
    else:
        prev = list(range(lb + 1))
        for i, ca in enumerate(a, 1):
            cur = [i] + [0] * lb
            for j, cb in enumerate(b, 1):
                cur[j] = min(
                    cur[j - 1] + 1,
                    prev[j] + 1,
                    prev[j - 1] + (ca != cb),
                )
            prev = cur
        d = float(prev[lb])
    if mode == DistanceMode.LENGTH_NORMALIZED:
        return d / max(la, lb, 1)
    return d


class GcmModel:
    """Immutable exemplar inventory with precomputed arrays for batch scoring."""

    def __init__(
        self,
        exemplars: Sequence[Exemplar],
        sensitivity: float = DEFAULT_SENSITIVITY,
        distance_mode: str = DistanceMode.RAW_EDIT,
        kernel: str = Kernel.EXPONENTIAL,
    ):
        exemplars = list(exemplars)
        if sensitivity <= 0:
            raise InputError("sensitivity must be positive")
        categories = {e.choice for e in exemplars}
        if len(categories) < len(SuffixChoice):
            raise InputError("need at least one exemplar per category")
        self.exemplars = exemplars
        self.sensitivity = float(sensitivity)
        self.distance_mode = distance_mode
        self.kernel = kernel
        width = max(len(e.form) for e in exemplars)
        n = len(exemplars)
        # transposed layout: row j holds character j of every exemplar, so the
        # DP inner loop works on contiguous vectors
        self._padded = np.zeros((width, n), dtype=np.int16)
        self._lengths = np.empty(n, dtype=np.int64)
        self._weights = np.empty(n, dtype=np.float64)
        self._is_ity = np.empty(n, dtype=bool)
        for i, e in enumerate(exemplars):
            for j, c in enumerate(e.form):
                self._padded[j, i] = ord(c)
            self._lengths[i] = len(e.form)
            self._weights[i] = e.weight
            self._is_ity[i] = e.choice is SuffixChoice.ITY
        self._gather = (self._lengths, np.arange(n))

    def distances(self, query: str) -> np.ndarray:
        """Levenshtein distance from the query to every exemplar at once."""
        q = [ord(c) for c in query]
        width, n = self._padded.shape
        if not q:
            d = self._lengths.astype(np.float64)
        else:
            prev = np.repeat(np.arange(width + 1, dtype=np.float64), n).reshape(
                width + 1, n
            )
            cur = np.empty_like(prev)
            tmp = np.empty(n, dtype=np.float64)
            for i in range(1, len(q) + 1):
                mismatch = self._padded != q[i - 1]
                cur[0] = i
                for j in range(1, width + 1):
                    np.add(prev[j - 1], mismatch[j - 1], out=tmp)
                    np.minimum(tmp, prev[j] + 1.0, out=tmp)
                    np.minimum(tmp, cur[j - 1] + 1.0, out=tmp)
                    cur[j] = tmp
                prev, cur = cur, prev
            d = prev[self._gather]
        if self.distance_mode == DistanceMode.LENGTH_NORMALIZED:
            d = d / np.maximum(np.maximum(self._lengths, len(q)), 1)
        return d

    def similarities(self, query: str) -> np.ndarray:
        d = self.distances(query)
        if self.kernel == Kernel.GAUSSIAN:
            d = d * d
        return self._weights * np.exp(-self.sensitivity * d)

    def save(self, path) -> None:
        with open_write(path) as fh:
            fh.write(f"#sensitivity={self.sensitivity:.10g}"
                     f"\tdistance={self.distance_mode}\tkernel={self.kernel}\n")
            for e in self.exemplars:
                fh.write(f"{e.form}\t{e.choice.suffix}\t{e.weight:.10g}\n")

    @classmethod
    def load(cls, path, sensitivity: Optional[float] = None) -> "GcmModel":
        exemplars = []
        c, dist_mode, kernel = DEFAULT_SENSITIVITY, DistanceMode.RAW_EDIT, Kernel.EXPONENTIAL
        with open_read(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    for part in line[1:].split("\t"):
                        key, _, value = part.partition("=")
                        if key == "sensitivity":
                            c = float(value)
                        elif key == "distance":
                            dist_mode = value
                        elif key == "kernel":
                            kernel = value
                    continue
                try:
                    form, choice, w = line.split("\t")
                    exemplars.append(Exemplar(form, SuffixChoice.parse(choice), float(w)))
                except (ValueError, InputError) as exc:
                    raise InputError(f"{path}:{lineno}: bad exemplar row {line!r}") from exc
        if sensitivity is not None:
            c = sensitivity
        return cls(exemplars, c, dist_mode, kernel)


def exemplars_from_lexicon(
    entries: Iterable[LexiconEntry], mode: str
) -> list[Exemplar]:
    """TYPE mode: weight 1 per attested (base, choice); TOKEN: raw counts."""
    out = []
    for e in entries:
        if e.ity_count > 0:
            w = 1.0 if mode == "type" else float(e.ity_count)
            out.append(Exemplar(e.base.form, SuffixChoice.ITY, w))
        if e.ness_count > 0:
            w = 1.0 if mode == "type" else float(e.ness_count)
            out.append(Exemplar(e.base.form, SuffixChoice.NESS, w))
    return out


def score(model: GcmModel, query) -> dict[SuffixChoice, float]:
    """Normalized per-category similarity mass; sums to 1."""
    word = query.form if isinstance(query, Base) else str(query)
    sims = model.similarities(word)
    s_ity = float(sims[model._is_ity].sum())
    s_ness = float(sims[~model._is_ity].sum())
    total = s_ity + s_ness
    if total <= 0.0 or not math.isfinite(total):
        raise DegenerateScoreError(
            f"similarity mass for {word!r} is numerically degenerate"
        )
    return {SuffixChoice.ITY: s_ity / total, SuffixChoice.NESS: s_ness / total}


def predict(model: GcmModel, query) -> SuffixChoice:
    """Argmax of score; exact ties go to ITY."""
    p = score(model, query)
    return (
        SuffixChoice.NESS
        if p[SuffixChoice.NESS] > p[SuffixChoice.ITY]
        else SuffixChoice.ITY
    )


def default_grid(lo: float = 0.1, hi: float = 5.0, points: int = 25) -> list[float]:
    return [float(v) for v in np.geomspace(lo, hi, points)]


def fit_sensitivity(
    entries: Sequence[LexiconEntry],
    mode: str = "type",
    grid: Optional[Sequence[float]] = None,
    max_queries: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Leave-one-out accuracy over the lexicon, maximized over a log grid.

    For each held-out base, all of that base's exemplars are removed and the
    remaining inventory predicts its preferred derivative. Ties in accuracy
    go to the smaller sensitivity. max_queries subsamples the held-out bases
    (deterministically) to keep the sweep tractable on large lexicons.
    """
    grid = list(grid) if grid is not None else default_grid()
    if not grid:
        raise InputError("empty sensitivity grid")
    entries = list(entries)
    if not entries:
        raise InputError("empty lexicon")
    exemplars = exemplars_from_lexicon(entries, mode)
    if {e.choice for e in exemplars} != set(SuffixChoice):
        raise InputError("need both categories attested to fit sensitivity")
    model = GcmModel(exemplars, sensitivity=1.0)
    queries = entries
    if max_queries is not None and max_queries < len(entries):
        rng = np.random.default_rng(seed)
        idx = rng.permutation(len(entries))[:max_queries]
        queries = [entries[i] for i in sorted(idx)]

    own = {}
    for i, e in enumerate(model.exemplars):
        own.setdefault(e.form, []).append(i)

    grid_arr = np.asarray(grid, dtype=np.float64)
    correct = np.zeros(grid_arr.size, dtype=np.int64)
    for entry in queries:
        d = model.distances(entry.base.form)
        w = model._weights.copy()
        for i in own.get(entry.base.form, ()):
            w[i] = 0.0
        sim = w[None, :] * np.exp(-grid_arr[:, None] * d[None, :])
        s_ity = sim[:, model._is_ity].sum(axis=1)
        s_ness = sim[:, ~model._is_ity].sum(axis=1)
        predicted_ness = s_ness > s_ity
        want_ness = entry.preferred is SuffixChoice.NESS
        correct += predicted_ness == want_ness
    best = max(range(grid_arr.size), key=lambda i: (correct[i], -grid_arr[i]))
    return float(grid_arr[best])
