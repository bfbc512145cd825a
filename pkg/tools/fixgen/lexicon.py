"""Synthetic lexicon with exact class statistics and engineered neighborhoods.

The multiset of token counts per (class, choice) is fixed up front to match
the reference class-statistics table exactly; construction then only decides
which word form carries which count. Variable-class nonce items get two
kinds of dedicated neighbors:

  * slot families: words ending in a tail unique to the item, visible to the
    rule learner through a wildcard-slot rule whose confidence is set by the
    family's size (types) and token mass;
  * left extensions: words of the form <char(s)> + nonce, at edit distance
    1-2 from the item but invisible to the rule learner for that item (their
    contexts always require material the nonce does not have), which steer
    the exemplar model only.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources

from ityness.morphlex import AdjectiveClass, Base, SuffixChoice, apply_suffix

from .pools import build_pool, build_trimmed_pool, ensure_values
from .wordgen import FormFactory

I, N = SuffixChoice.ITY, SuffixChoice.NESS

LENGTH_BANDS = {
    "able": [(9, 0.12), (10, 0.34), (11, 0.34), (12, 0.20)],
    "al": [(7, 0.15), (8, 0.33), (9, 0.33), (10, 0.19)],
    "ar": [(7, 0.15), (8, 0.33), (9, 0.33), (10, 0.19)],
    "ed": [(7, 0.15), (8, 0.33), (9, 0.33), (10, 0.19)],
    "ic": [(7, 0.15), (8, 0.33), (9, 0.33), (10, 0.19)],
    "ing": [(8, 0.15), (9, 0.33), (10, 0.33), (11, 0.19)],
    "ish": [(6, 0.15), (7, 0.34), (8, 0.34), (9, 0.17)],
    "ive": [(8, 0.10), (9, 0.33), (10, 0.33), (11, 0.18), (12, 0.06)],
    "less": [(8, 0.15), (9, 0.33), (10, 0.33), (11, 0.19)],
    "ous": [(8, 0.10), (9, 0.33), (10, 0.33), (11, 0.18), (12, 0.06)],
}


def load_targets():
    raw = resources.files("ityness.data").joinpath("reference_targets.json").read_text("utf-8")
    return json.loads(raw)


def load_nonces() -> dict[str, list[str]]:
    raw = resources.files("ityness.data").joinpath("nonce_adjectives.tsv").read_text("utf-8")
    out: dict[str, list[str]] = defaultdict(list)
    for line in raw.splitlines():
        form, cls = line.split("\t")
        out[cls.lstrip("-")].append(form)
    return dict(out)


@dataclass
class Entry:
    form: str
    cls: str
    ity: int = 0
    ness: int = 0
    base_count: int = 1
    tag: str = "diffuse"  # diffuse | slot:<item> | ext:<item> | anchor


@dataclass
class FamilySpec:
    """Per-nonce engineered neighborhood."""

    item: str
    cls: str
    tail: str
    slot_ity_types: int = 0
    slot_ity_tokens: int = 0
    slot_ness_types: int = 0
    slot_ness_tokens: int = 0
    ext_ity_types: int = 0
    ext_ity_tokens: int = 0
    ext_ness_types: int = 0
    ext_ness_tokens: int = 0


class LexiconBuilder:
    def __init__(self, seed: int = 20_240_901):
        self.targets = load_targets()
        self.nonces = load_nonces()
        self.seed = seed
        self.rng = random.Random(seed)
        banned = set()
        for cls, forms in self.nonces.items():
            for f in forms:
                base = Base(f, AdjectiveClass.parse(cls))
                banned.add(f)
                banned.add(apply_suffix(base, I))
                banned.add(apply_suffix(base, N))
        self.banned = banned
        self.factory = FormFactory(seed + 1, banned)
        self.entries: dict[str, Entry] = {}
        self.reserved_tails: list[str] = []
        self.pools: dict[tuple[str, str], list[int]] = {}
        self._build_pools()

    # -- pools ------------------------------------------------------------

    def _build_pools(self):
        stats = self.targets["class_stats"]
        trimmed = self.targets["ous_trimmed_means"]
        for label, row in stats.items():
            cls = label.lstrip("-")
            for choice, key in (("ity", I), ("ness", N)):
                types = row[f"{choice}_types"]
                mean = row[f"{choice}_mean"]
                hapax = row[f"{choice}_hapax"]
                total = round(mean * types)
                rng = random.Random(self.seed + hash_str(f"pool:{cls}:{choice}"))
                if cls == "ous":
                    k = int(types * 0.05 + 0.5)
                    pool = build_trimmed_pool(
                        rng, types, hapax, total, trimmed[choice], k
                    )
                elif types == 0:
                    pool = []
                else:
                    cap = 400_000 if types > 50 else max(4, total)
                    pool = build_pool(rng, types, hapax, total, cap=cap)
                self.pools[(cls, choice)] = pool
        # pin the anchor counts for "manipulative"
        anchors = self.targets["neighborhood_anchors"]["manipulative"]
        self.pools[("ive", "ness")] = ensure_values(
            self.pools[("ive", "ness")], [anchors["ness_count"]]
        )
        self.pools[("ive", "ity")] = ensure_values(
            self.pools[("ive", "ity")], [anchors["ity_count"]]
        )

    # -- helpers ----------------------------------------------------------

    def take_counts(self, cls: str, choice: str, n: int, total: int) -> list[int]:
        """Remove n values summing close to `total` from a pool (greedy)."""
        pool = self.pools[(cls, choice)]
        if n == 0:
            return []
        if n > len(pool):
            raise RuntimeError(f"pool exhausted: {cls}/{choice}")
        picked_idx = []
        remaining = total
        left = n
        used = set()
        for _ in range(n):
            share = remaining / left
            best = min(
                (i for i in range(len(pool)) if i not in used),
                key=lambda i: abs(pool[i] - share),
            )
            used.add(best)
            picked_idx.append(best)
            remaining -= pool[best]
            left -= 1
        picked = [pool[i] for i in picked_idx]
        for i in sorted(picked_idx, reverse=True):
            del pool[i]
        return sorted(picked, reverse=True)

    def take_heavy_then_light(
        self, cls: str, choice: str, n: int, total: int
    ) -> list[int]:
        """One heavy value carrying most of `total`, the rest light."""
        if n == 0:
            return []
        if total < 10_000 or n == 1:
            return self.take_counts(cls, choice, n, total)
        light_budget = (n - 1) * 50
        heavy = self.take_exact(cls, choice, total - light_budget)
        light = self.take_counts(cls, choice, n - 1, light_budget)
        return [heavy] + light

    def pin_heavy_values(self, demands: dict[tuple[str, str], list[int]]):
        """Make sure each pool contains the heavy values families will draw.

        For -ous the repair is confined to the top (untrimmed) section so the
        trimmed mean stays exact.
        """
        for (cls, choice), values in sorted(demands.items()):
            pool = sorted(self.pools[(cls, choice)])
            if cls == "ous":
                types = len(pool)
                k = int(types * 0.05 + 0.5)
                bottom, top = pool[: types - k], pool[types - k :]
                floor = bottom[-1] + 1
                top = ensure_values(top, values, floor=floor)
                assert min(top) >= floor
                self.pools[(cls, choice)] = bottom + top
            else:
                self.pools[(cls, choice)] = ensure_values(pool, values)

    def take_exact(self, cls: str, choice: str, value: int) -> int:
        pool = self.pools[(cls, choice)]
        i = min(range(len(pool)), key=lambda i: abs(pool[i] - value))
        v = pool.pop(i)
        return v

    def add_entry(self, form: str, cls: str, tag: str) -> Entry:
        e = Entry(form=form, cls=cls, tag=tag)
        if form in self.entries:
            raise RuntimeError(f"duplicate entry {form}")
        self.entries[form] = e
        return e

    def _sample_length(self, cls: str) -> int:
        bands = LENGTH_BANDS[cls]
        r = self.rng.random()
        acc = 0.0
        for length, p in bands:
            acc += p
            if r <= acc:
                return length
        return bands[-1][0]

    def backbone_predicate(self, cls: str):
        tails = self.reserved_tails
        nonce_forms = self.nonces.get(cls, [])

        def ok(form: str) -> bool:
            for t in tails:
                if form.endswith(t):
                    return False
            return True

        return ok

    # -- families ----------------------------------------------------------

    def reserve_tail(self, item: str, all_nonces: list[str], sharers=()) -> str:
        """Shortest suffix of the item, >= 5 chars, unique among nonces and
        not nested with previously reserved tails.

        Items in `sharers` (same-pattern neighbors) may share the tail; the
        identical tail is then reused rather than re-reserved.
        """
        sharers = set(sharers)
        for k in range(5, len(item)):
            tail = item[-k:]
            if any(
                other != item and other not in sharers and other.endswith(tail)
                for other in all_nonces
            ):
                continue
            if tail in self.reserved_tails:
                return tail  # shared with a same-pattern sibling
            clash = any(
                t.endswith(tail) or tail.endswith(t) for t in self.reserved_tails
            )
            if clash:
                continue
            self.reserved_tails.append(tail)
            return tail
        raise RuntimeError(f"no reservable tail for {item}")

    def build_slot_family(self, spec: FamilySpec, winner: str):
        """Two nested levels of the item's suffix chain, one per side.

        The side that must win type mode sits at the deeper level and owns a
        pure wildcard-slot rule there (nothing else ends that literal); the
        other side sits one level shallower and is diluted by the deep side's
        mass passing through. Deeper levels never receive shallower mass.
        """
        q = spec.item
        t = spec.tail
        if len(q) >= len(t) + 3:
            deep_level = q[-(len(t) + 2):]
            shallow_level = q[-(len(t) + 1):]
        elif len(q) >= len(t) + 2:
            deep_level = q[-(len(t) + 1):]
            shallow_level = t
        else:
            raise RuntimeError(f"tail {t!r} too long for {q!r}")
        loser = "ness" if winner == "ity" else "ity"
        plans = (
            (winner, deep_level),
            (loser, shallow_level),
        )
        for choice, level in plans:
            n = getattr(spec, f"slot_{choice}_types")
            total = getattr(spec, f"slot_{choice}_tokens")
            if n == 0:
                continue
            counts = self.take_heavy_then_light(spec.cls, choice, n, total)
            # the member's char before the level must differ from the item's
            # own continuation, or the member would land one level deeper
            own_next = q[-(len(level) + 1)] if len(q) > len(level) else ""
            slot_chars = [c for c in "bcdfglmnprstvw" if c != own_next]
            for j in range(n):
                ch = slot_chars[j % 4]
                tail = ch + level
                length = max(len(tail) + 2, self._sample_length(spec.cls))
                form = self.factory.fresh_with_tail(tail, length)
                e = self.add_entry(form, spec.cls, f"slot:{q}")
                setattr(e, choice, counts[j])

    def _near_mutants(self, q: str, cls: str, tail: str, wanted: int) -> list[str]:
        """Distance-1/2 variants of the item that keep the class suffix but
        break the unique tail, so they are invisible to the item's rules."""
        suffix_len = {"able": 4, "al": 2, "ar": 2, "ed": 2, "ic": 2, "ing": 3,
                      "ish": 3, "ive": 3, "less": 4, "ous": 3}[cls]
        out = []
        letters = "abcdefghijklmnopqrstuvwy"
        positions = [len(q) - suffix_len - 1, len(q) - suffix_len - 2]
        candidates = []
        for pos in positions:
            if pos < 1:
                continue
            for ch in letters:
                if ch != q[pos]:
                    candidates.append(q[:pos] + ch + q[pos + 1:])
        for pos in positions:  # insertions, distance 1
            if pos < 1:
                continue
            for ch in letters:
                candidates.append(q[:pos] + ch + q[pos:])
        p0, p1 = positions
        if p1 >= 1:  # two substitutions, distance 2
            for ch0 in "aeiou":
                for ch1 in "lnrst":
                    if ch0 != q[p0] and ch1 != q[p1]:
                        candidates.append(
                            q[:p1] + ch1 + q[p1 + 1:p0] + ch0 + q[p0 + 1:]
                        )
        for cand in candidates:
            if len(out) >= wanted:
                break
            if cand in self.factory.used:
                continue
            if any(cand.endswith(rt) for rt in self.reserved_tails):
                continue
            if cand.endswith(tail):
                continue
            out.append(cand)
            self.factory.claim(cand)
        if len(out) < wanted:
            raise RuntimeError(f"not enough near mutants for {q}")
        return out

    def build_extensions(self, spec: FamilySpec):
        """Near mutants of the item: exemplar-side forcing only."""
        q = spec.item
        for choice, n, total in (
            ("ity", spec.ext_ity_types, spec.ext_ity_tokens),
            ("ness", spec.ext_ness_types, spec.ext_ness_tokens),
        ):
            if n == 0:
                continue
            counts = self.take_heavy_then_light(spec.cls, choice, n, total)
            forms = self._near_mutants(q, spec.cls, spec.tail, n)
            for form, count in zip(forms, counts):
                e = self.add_entry(form, spec.cls, f"ext:{q}")
                setattr(e, choice, count)

    def build_counterweights(self, specs: list["FamilySpec"]):
        """Opposite-side token mass at mid suffixes shared by heavy families.

        Keeps leaked wildcard rules at shared mid contexts (e.g. "orous")
        diluted so they cannot outrank another item's own family rules.
        """
        from collections import Counter

        hot: Counter = Counter()
        for s in specs:
            if s.slot_ness_tokens >= 10_000:
                mid = s.item[-5:]
                hot[(s.cls, mid)] += s.slot_ness_tokens
        for (cls, mid), mass in sorted(hot.items()):
            pool_total = sum(self.pools[(cls, "ity")])
            budget = min(int(mass * 1.2), pool_total // 4)
            if budget < 10_000:
                continue
            tails = []
            for ch in "bdfgmpv":
                tail = ch + mid
                if not any(
                    tail.endswith(rt) or rt.endswith(tail)
                    for rt in self.reserved_tails
                ):
                    tails.append(tail)
            n = max(2, min(4, budget // 80_000 + 1))
            n = min(n, len(tails))
            if n == 0:
                continue
            counts = self.take_counts(cls, "ity", n, budget)
            for tail, count in zip(tails, counts):
                length = max(len(tail) + 3, self._sample_length(cls))
                form = self.factory.fresh_with_tail(tail, length)
                self.add_entry(form, cls, f"cw:{mid}").ity = count

    # -- phases -------------------------------------------------------------

    def build_lative_anchor(self):
        """The '-lative' neighborhood: 88 ity-attested vs 27 ness-attested
        bases, including 'manipulative' (both, with its pinned counts)."""
        anchors = self.targets["neighborhood_anchors"]
        lat = anchors["lative_family"]
        man = anchors["manipulative"]
        e = self.add_entry("manipulative", "ive", "anchor")
        e.ity = self.take_exact("ive", "ity", man["ity_count"])
        e.ness = self.take_exact("ive", "ness", man["ness_count"])
        assert e.ity == man["ity_count"] and e.ness == man["ness_count"]
        # 87 more ity-attested and 26 more ness-attested lative bases, all
        # kept clear of 'pepulative' (distance >= 3 via distinct stems)
        n_ity = lat["ity_types"] - 1
        n_ness = lat["ness_types"] - 1
        ity_counts = self.take_counts("ive", "ity", n_ity, n_ity * 30)
        ness_counts = self.take_counts("ive", "ness", n_ness, n_ness * 35)
        made_ity = made_ness = 0
        guard = 0
        while made_ity < n_ity or made_ness < n_ness:
            guard += 1
            if guard > 200_000:
                raise RuntimeError("lative anchor generation stalled")
            length = max(9, self._sample_length("ive"))
            form = self.factory.fresh_with_tail(
                "lative", length, predicate=lambda f: not f.endswith("ulative")
            )
            if made_ity < n_ity:
                e = self.add_entry(form, "ive", "anchor")
                e.ity = ity_counts[made_ity]
                made_ity += 1
            else:
                e = self.add_entry(form, "ive", "anchor")
                e.ness = ness_counts[made_ness]
                made_ness += 1

    def build_families(self, specs: list[FamilySpec], winners: dict[str, str]):
        for spec in specs:
            self.build_slot_family(spec, winners[spec.item])
            self.build_extensions(spec)

    def finish_backbone(self):
        """Spend every remaining pool slot on diffuse forms, wiring enough
        both-attested bases so the entry total matches the target."""
        stats = self.targets["class_stats"]
        total_types = sum(r["ity_types"] + r["ness_types"] for r in stats.values())
        need_both = total_types - self.targets["total_bases"]
        need_both -= sum(1 for e in self.entries.values() if e.ity > 0 and e.ness > 0)
        classes = sorted(label.lstrip("-") for label in stats)
        capacity = {
            cls: min(len(self.pools[(cls, "ity")]), len(self.pools[(cls, "ness")]))
            for cls in classes
        }
        cap_sum = sum(capacity.values())
        assert cap_sum >= need_both, (capacity, need_both)
        overlaps = {}
        acc = 0
        for cls in classes[:-1]:
            v = min(capacity[cls], round(need_both * capacity[cls] / cap_sum))
            overlaps[cls] = v
            acc += v
        overlaps[classes[-1]] = need_both - acc
        # repair any residual overshoot on the last class
        spill = overlaps[classes[-1]] - capacity[classes[-1]]
        if spill > 0:
            overlaps[classes[-1]] = capacity[classes[-1]]
            for cls in classes[:-1]:
                room = capacity[cls] - overlaps[cls]
                take = min(room, spill)
                overlaps[cls] += take
                spill -= take
                if spill == 0:
                    break
            assert spill == 0
        for cls in classes:
            pred = self.backbone_predicate(cls)
            pool_i = self.pools[(cls, "ity")]
            pool_n = self.pools[(cls, "ness")]
            self.rng.shuffle(pool_i)
            self.rng.shuffle(pool_n)
            for _ in range(overlaps[cls]):
                form = self.factory.fresh(cls, self._sample_length(cls), pred)
                e = self.add_entry(form, cls, "diffuse")
                e.ity = pool_i.pop()
                e.ness = pool_n.pop()
            while pool_i:
                form = self.factory.fresh(cls, self._sample_length(cls), pred)
                self.add_entry(form, cls, "diffuse").ity = pool_i.pop()
            while pool_n:
                form = self.factory.fresh(cls, self._sample_length(cls), pred)
                self.add_entry(form, cls, "diffuse").ness = pool_n.pop()

    def assign_base_counts(self):
        rng = random.Random(self.seed + 17)
        for form in sorted(self.entries):
            e = self.entries[form]
            e.base_count = min(500_000, max(1, int(rng.paretovariate(1.1) * 3)))

    def validate(self):
        stats = self.targets["class_stats"]
        per = defaultdict(lambda: {"ity": [], "ness": []})
        for e in self.entries.values():
            assert e.ity > 0 or e.ness > 0
            if e.ity:
                per[e.cls]["ity"].append(e.ity)
            if e.ness:
                per[e.cls]["ness"].append(e.ness)
        for label, row in stats.items():
            cls = label.lstrip("-")
            for choice in ("ity", "ness"):
                values = per[cls][choice]
                assert len(values) == row[f"{choice}_types"], (cls, choice, len(values))
                assert sum(1 for v in values if v == 1) == row[f"{choice}_hapax"]
                total = round(row[f"{choice}_mean"] * row[f"{choice}_types"])
                assert sum(values) == total, (cls, choice, sum(values), total)
        assert len(self.entries) == self.targets["total_bases"], len(self.entries)
        for form in self.entries:
            assert form not in self.banned
            d_i = apply_suffix(Base(form, AdjectiveClass.parse(self.entries[form].cls)), I)
            d_n = apply_suffix(Base(form, AdjectiveClass.parse(self.entries[form].cls)), N)
            assert d_i not in self.banned and d_n not in self.banned

    def to_lexicon_rows(self):
        rows = []
        for form in sorted(self.entries):
            e = self.entries[form]
            rows.append((form, e.cls, e.base_count, e.ity, e.ness))
        return rows


def hash_str(s: str) -> int:
    h = 2166136261
    for ch in s.encode():
        h = (h ^ ch) * 16777619 % (1 << 32)
    return h
