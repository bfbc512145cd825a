"""Minimal Generalization Learner over word-final orthographic contexts.

Rules are induced from (base, suffix-choice) training pairs by pairwise
minimal generalization: contexts align right-to-left, the shared word-final
literal is kept, the first mismatching position becomes a generalized slot
(a two-character set, or a wildcard once a slot is generalized further), and
any remaining left material becomes a free variable. Rule pairs that share
no word-final literal character are not generalized.

Training enumerates the full closure directly on a reversed-suffix trie
instead of materializing quadratic pairwise comparisons; hits and scope are
read off per-node aggregates, so both are computed against the complete
weighted training set exactly as pairwise closure would produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Optional, Sequence

from .corpus import LexiconEntry
from .errors import InputError, NoCoverageError
from .morphlex import Base, SuffixChoice

ANY = "?"  # wildcard slot marker

DEFAULT_ALPHA = 0.75
_Z_DEFAULT = 0.6745  # 75th percentile of the standard normal


class Mode:
    TYPE = "type"
    TOKEN = "token"


@dataclass(frozen=True, slots=True)
class RuleContext:
    """[X] [slot] literal, right-anchored at the end of the word."""

    free: bool
    slot: Optional[frozenset | str]  # None, frozenset of chars, or ANY
    literal: str

    def matches(self, word: str) -> bool:
        lit = self.literal
        if not word.endswith(lit):
            return False
        rest = len(word) - len(lit)
        if self.slot is None:
            return self.free or rest == 0
        if rest == 0:
            return False
        ch = word[rest - 1]
        if self.slot != ANY and ch not in self.slot:
            return False
        return self.free or rest == 1

    def render(self) -> str:
        parts = []
        if self.free:
            parts.append("X")
        if self.slot == ANY:
            parts.append(ANY)
        elif self.slot is not None:
            parts.append("[" + "".join(sorted(self.slot)) + "]")
        parts.append(self.literal)
        return "".join(parts)

    @classmethod
    def parse(cls, text: str) -> "RuleContext":
        free = False
        slot = None
        rest = text
        if rest.startswith("X"):
            free = True
            rest = rest[1:]
        if rest.startswith(ANY):
            slot = ANY
            rest = rest[1:]
        elif rest.startswith("["):
            end = rest.index("]")
            slot = frozenset(rest[1:end])
            rest = rest[end + 1 :]
        return cls(free, slot, rest)


@dataclass(frozen=True, slots=True)
class MglRule:
    output: SuffixChoice
    context: RuleContext
    hits: float
    scope: float
    reliability: float
    confidence: float

    def render(self) -> str:
        return (
            f"{self.output.suffix}\t{self.context.render()}\t{self.hits:.10g}"
            f"\t{self.scope:.10g}\t{self.reliability:.10g}\t{self.confidence:.10g}"
        )


def z_for_alpha(alpha: float) -> float:
    if not (0.5 < alpha < 1.0):
        raise InputError("alpha must lie in (0.5, 1)")
    if alpha == DEFAULT_ALPHA:
        return _Z_DEFAULT
    return NormalDist().inv_cdf(alpha)


def adjusted_confidence(hits: float, scope: float, z: float) -> float:
    """Lower confidence bound of reliability, rewarding larger scope."""
    p_star = (hits + 0.5) / (scope + 1.0)
    return p_star - z * math.sqrt(p_star * (1.0 - p_star) / scope)


# ---------------------------------------------------------------------------
# Pairwise minimal generalization (the closure is enumerated on a trie in
# train(); this operation is the definitional pairwise step)
# ---------------------------------------------------------------------------


def _common_suffix(a: str, b: str) -> str:
    n = 0
    while n < len(a) and n < len(b) and a[-1 - n] == b[-1 - n]:
        n += 1
    return a[len(a) - n :] if n else ""


def _pre_element(ctx: RuleContext, shared_len: int):
    """What sits immediately left of the shared literal, plus a more-left flag."""
    lit = ctx.literal
    if len(lit) > shared_len:
        ch = lit[-shared_len - 1]
        more = (len(lit) - shared_len > 1) or ctx.slot is not None or ctx.free
        return ("char", ch), more
    if ctx.slot is not None:
        return ("slot", ctx.slot), ctx.free
    if ctx.free:
        return ("open",), False
    return ("boundary",), False


def generalize_contexts(c1: RuleContext, c2: RuleContext) -> Optional[RuleContext]:
    if c1 == c2:
        return c1
    shared = _common_suffix(c1.literal, c2.literal)
    if not shared:
        return None  # no word-final literal character in common
    e1, more1 = _pre_element(c1, len(shared))
    e2, more2 = _pre_element(c2, len(shared))
    kinds = {e1[0], e2[0]}
    if "open" in kinds or "boundary" in kinds:
        # one side has nothing (or anything) at the slot position
        return RuleContext(True, None, shared)
    free = more1 or more2
    if e1[0] == "char" and e2[0] == "char":
        return RuleContext(free, frozenset((e1[1], e2[1])), shared)
    if e1[0] == "slot" and e2[0] == "slot" and e1[1] == e2[1]:
        return RuleContext(free, e1[1], shared)
    # a slot that is generalized further becomes a wildcard
    return RuleContext(free, ANY, shared)


def minimal_generalize(r1: MglRule, r2: MglRule) -> Optional[MglRule]:
    """Generalize two rules of the same output; None if outputs differ.

    The returned rule carries the generalized context only; train()
    recomputes hits and scope against the full training set.
    """
    if r1.output is not r2.output:
        return None
    ctx = generalize_contexts(r1.context, r2.context)
    if ctx is None:
        return None
    return MglRule(r1.output, ctx, 0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

_CHILD, _SUB_I, _SUB_N, _EXACT_I, _EXACT_N = range(5)


def _new_node():
    return [{}, 0.0, 0.0, 0.0, 0.0]


def _build_trie(items):
    root = _new_node()
    for form, choice, w in items:
        node = root
        sub = _SUB_I if choice is SuffixChoice.ITY else _SUB_N
        node[sub] += w
        for ch in reversed(form):
            nxt = node[_CHILD].get(ch)
            if nxt is None:
                nxt = _new_node()
                node[_CHILD][ch] = nxt
            node = nxt
            node[sub] += w
        node[_EXACT_I if choice is SuffixChoice.ITY else _EXACT_N] += w
    return root


def items_from_lexicon(
    entries: Iterable[LexiconEntry], mode: str
) -> list[tuple[str, SuffixChoice, float]]:
    """One training item per attested (base, choice), weighted per mode."""
    items = []
    for e in entries:
        if e.ity_count > 0:
            items.append((e.base.form, SuffixChoice.ITY, float(e.ity_count)))
        if e.ness_count > 0:
            items.append((e.base.form, SuffixChoice.NESS, float(e.ness_count)))
    if mode == Mode.TYPE:
        return [(f, c, 1.0) for f, c, _ in items]
    return items


class MglModel:
    """Deduplicated rule inventory plus a literal index for prediction."""

    def __init__(self, rules: list[MglRule], mode: str, alpha: float):
        self.rules = rules
        self.mode = mode
        self.alpha = alpha
        self._by_literal: dict[str, list[MglRule]] = {}
        for r in rules:
            self._by_literal.setdefault(r.context.literal, []).append(r)

    def __len__(self) -> int:
        return len(self.rules)

    def candidate_rules(self, word: str) -> Iterable[MglRule]:
        for start in range(len(word) + 1):
            bucket = self._by_literal.get(word[start:])
            if bucket:
                yield from bucket

    def save(self, path) -> None:
        from .ioutil import open_write

        with open_write(path) as fh:
            fh.write(f"#mode={self.mode}\talpha={self.alpha:.10g}\n")
            for r in self.rules:
                fh.write(r.render() + "\n")

    @classmethod
    def load(cls, path) -> "MglModel":
        from .ioutil import open_read

        mode, alpha = Mode.TYPE, DEFAULT_ALPHA
        rules = []
        with open_read(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    for part in line[1:].split("\t"):
                        key, _, value = part.partition("=")
                        if key == "mode":
                            mode = value
                        elif key == "alpha":
                            alpha = float(value)
                    continue
                try:
                    out, ctx, hits, scope, rel, conf = line.split("\t")
                    rules.append(
                        MglRule(
                            SuffixChoice.parse(out),
                            RuleContext.parse(ctx),
                            float(hits),
                            float(scope),
                            float(rel),
                            float(conf),
                        )
                    )
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: bad rule line {line!r}") from exc
        return cls(rules, mode, alpha)


def train(
    items: Sequence[tuple],
    mode: str = Mode.TYPE,
    alpha: float = DEFAULT_ALPHA,
) -> MglModel:
    """Induce the closed rule set from (form|Base, choice, weight) items.

    In TYPE mode all weights are 1. In TOKEN mode weights are the token
    counts, normalized to mean 1 so that predictions are invariant under a
    global rescaling of all counts.
    """
    z = z_for_alpha(alpha)
    norm: list[tuple[str, SuffixChoice, float]] = []
    for form, choice, w in items:
        if isinstance(form, Base):
            form = form.form
        if w <= 0:
            raise InputError(f"non-positive weight for {form!r}")
        norm.append((form, choice, float(w)))
    if not norm:
        raise InputError("empty training set")
    if mode == Mode.TYPE:
        norm = [(f, c, 1.0) for f, c, _ in norm]
    elif mode == Mode.TOKEN:
        mean_w = sum(w for _, _, w in norm) / len(norm)
        norm = [(f, c, w / mean_w) for f, c, w in norm]
    else:
        raise InputError(f"unknown mode {mode!r}")

    root = _build_trie(norm)
    rules: list[MglRule] = []

    def emit(output, free, slot, literal, hits, scope):
        if hits <= 0 or scope <= 0:
            return
        rel = hits / scope
        conf = adjusted_confidence(hits, scope, z)
        rules.append(
            MglRule(output, RuleContext(free, slot, literal), hits, scope, rel, conf)
        )

    # Walk the reversed-word trie once; every closure rule is determined by
    # the branching structure at its node.
    stack = [(root, "")]
    while stack:
        node, suffix = stack.pop()
        children = node[_CHILD]
        for ch in children:
            stack.append((children[ch], ch + suffix))

        total_sub = node[_SUB_I] + node[_SUB_N]
        total_exact = node[_EXACT_I] + node[_EXACT_N]
        for output, sub_idx, exact_idx in (
            (SuffixChoice.ITY, _SUB_I, _EXACT_I),
            (SuffixChoice.NESS, _SUB_N, _EXACT_N),
        ):
            node_exact_g = node[exact_idx]
            # atom: one anchored rule per distinct training form
            if node_exact_g > 0 and suffix:
                emit(output, False, None, suffix, node_exact_g, total_exact)

            if not children:
                continue
            ext = []
            for ch in sorted(children):
                child = children[ch]
                sub_g = child[sub_idx]
                if sub_g <= 0:
                    continue
                exact_g = child[exact_idx]
                ext.append((ch, child, exact_g > 0, sub_g - exact_g > 0))
            if not ext:
                continue

            # word == suffix plus longer words through the node: X + literal
            if node_exact_g > 0 and suffix:
                emit(
                    output, True, None, suffix,
                    node[sub_idx], total_sub,
                )

            if len(ext) < 2 or not suffix:
                continue

            # two-character slots from every branching pair
            for i in range(len(ext)):
                a, child_a, exact_a, deep_a = ext[i]
                for j in range(i + 1, len(ext)):
                    b, child_b, exact_b, deep_b = ext[j]
                    pair = frozenset((a, b))
                    scope2 = (
                        child_a[_SUB_I] + child_a[_SUB_N]
                        + child_b[_SUB_I] + child_b[_SUB_N]
                    )
                    hits2 = child_a[sub_idx] + child_b[sub_idx]
                    if deep_a or deep_b:
                        emit(output, True, pair, suffix, hits2, scope2)
                    if exact_a and exact_b:
                        scope0 = (
                            child_a[_EXACT_I] + child_a[_EXACT_N]
                            + child_b[_EXACT_I] + child_b[_EXACT_N]
                        )
                        hits0 = child_a[exact_idx] + child_b[exact_idx]
                        emit(output, False, pair, suffix, hits0, scope0)

            # wildcard slots once any slot generalizes further
            if any(deep for *_x, deep in ext):
                emit(
                    output, True, ANY, suffix,
                    node[sub_idx] - node[exact_idx],
                    total_sub - total_exact,
                )
            if sum(1 for _ch, _child, exact, _deep in ext if exact) >= 2:
                scope_any0 = sum(
                    c[_EXACT_I] + c[_EXACT_N] for c in children.values()
                )
                hits_any0 = sum(c[exact_idx] for c in children.values())
                emit(output, False, ANY, suffix, hits_any0, scope_any0)

    rules.sort(key=lambda r: (r.context.literal, r.context.render(), r.output))
    return MglModel(rules, mode, alpha)


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MglPrediction:
    choice: SuffixChoice
    best: dict[SuffixChoice, Optional[float]]
    rule: MglRule


def predict(model: MglModel, base) -> MglPrediction:
    """Pick the matching rule with the highest confidence.

    Ties break toward larger scope, then ITY before NESS. Raises
    NoCoverageError when no rule in the model matches the word.
    """
    word = base.form if isinstance(base, Base) else str(base)
    best_rule: dict[SuffixChoice, MglRule] = {}
    for rule in model.candidate_rules(word):
        if not rule.context.matches(word):
            continue
        cur = best_rule.get(rule.output)
        if cur is None or (rule.confidence, rule.scope) > (cur.confidence, cur.scope):
            best_rule[rule.output] = rule
    if not best_rule:
        raise NoCoverageError(f"no rule matches {word!r}")
    winner = max(
        best_rule.values(),
        key=lambda r: (r.confidence, r.scope, -int(r.output)),
    )
    best = {
        choice: (best_rule[choice].confidence if choice in best_rule else None)
        for choice in SuffixChoice
    }
    return MglPrediction(winner.output, best, winner)
