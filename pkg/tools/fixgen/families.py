"""Translate per-item target patterns into neighborhood dial settings.

Rule-side (MGL) forcing works through slot families living on the item's
own suffix chain: the type-mode winner owns a pure wildcard-slot rule at the
deep level, the other side sits one level shallower. Token-mode winners are
set by placing heavy token mass on the appropriate side. Exemplar-side (GCM)
forcing works through near mutants that keep the class suffix but break the
item tail, making them invisible to the item's rules.
"""

from __future__ import annotations

from .lexicon import FamilySpec
from .patterns import ItemTarget

HEAVY_SLOT_TOKENS = {"ive": 130_000, "ous": 90_000}
ITY_TOKEN_PIN = {"ive": 0, "ous": 60_000}  # explicit ity mass where the broad
                                           # token default is fragile
HEAVY_EXT_TOKENS = {"ive": 28_000, "ous": 25_000}
WINNER_TYPES = {"ive": 24, "ous": 20}
LOSER_TYPES = 2
EXT_STRONG_TYPES = 10
EXT_WEAK_TYPES = 2
LIGHT = 40


def dial(target: ItemTarget) -> FamilySpec:
    cls = target.cls
    m1_ness, m2_ness, m3_ness, m4_ness = target.model_ness()
    spec = FamilySpec(item=target.item, cls=cls, tail="")
    winner = "ness" if m1_ness else "ity"
    loser = "ity" if m1_ness else "ness"

    setattr(spec, f"slot_{winner}_types", WINNER_TYPES[cls])
    setattr(spec, f"slot_{loser}_types", LOSER_TYPES)
    spec.slot_ity_tokens = spec.slot_ity_types * LIGHT
    spec.slot_ness_tokens = spec.slot_ness_types * LIGHT

    if m2_ness:
        if winner != "ness":
            spec.slot_ness_types = 3
        spec.slot_ness_tokens = HEAVY_SLOT_TOKENS[cls]
    else:
        if ITY_TOKEN_PIN[cls]:
            if winner != "ity":
                spec.slot_ity_types = 3
            spec.slot_ity_tokens = ITY_TOKEN_PIN[cls]

    if m3_ness:
        spec.ext_ness_types = EXT_STRONG_TYPES
        spec.ext_ity_types = EXT_WEAK_TYPES
    else:
        spec.ext_ity_types = EXT_STRONG_TYPES
        spec.ext_ness_types = EXT_WEAK_TYPES
    spec.ext_ity_tokens = spec.ext_ity_types * 50
    spec.ext_ness_tokens = spec.ext_ness_types * 50
    if m4_ness:
        spec.ext_ness_tokens = HEAVY_EXT_TOKENS[cls]
    else:
        spec.ext_ity_tokens = HEAVY_EXT_TOKENS[cls]
    return spec


def winner_side(target: ItemTarget) -> str:
    return "ness" if target.model_ness()[0] else "ity"


def heavy_value_demands(specs: list[FamilySpec]) -> dict[tuple[str, str], list[int]]:
    """Big token values each pool must contain for the families to draw."""
    out: dict[tuple[str, str], list[int]] = {}
    for s in specs:
        for choice in ("ity", "ness"):
            for kind in ("slot", "ext"):
                types = getattr(s, f"{kind}_{choice}_types")
                tokens = getattr(s, f"{kind}_{choice}_tokens")
                if types and tokens >= 10_000:
                    out.setdefault((s.cls, choice), []).append(
                        tokens - (types - 1) * 50
                    )
    return out
