"""Measure-and-repair loop for the engineered lexicon.

All repairs are form renames or form swaps over diffuse entries: the count
multiset per (class, choice) never changes, so the class statistics stay
exact no matter how many rounds run.

Repair kinds:
  * dilute: a leaked rule (shared mid-literal pooling another family's heavy
    mass) outranks an item's own rule; rename diffuse opposite-side entries
    so they end inside the leaked context, dragging its reliability down.
  * gcm push: an item's exemplar margin has the wrong sign; rename diffuse
    same-side entries into additional near mutants of the item.
  * move away: a diffuse entry sits too close to a regular-class nonce with
    the wrong choice; rename it to a neutral faraway form.
"""

from __future__ import annotations

from ityness.gcm import distance
from ityness.morphlex import SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS


def renameable(builder, cls, choice, exclude_tags=("slot:", "ext:", "anchor")):
    out = []
    for form, e in builder.entries.items():
        if e.cls != cls:
            continue
        if any(e.tag.startswith(t) for t in exclude_tags):
            continue
        count = getattr(e, choice)
        other = e.ness if choice == "ity" else e.ity
        if count > 0 and other == 0:  # keep both-attested bases untouched
            out.append((count, form))
    out.sort()
    return out


def rename_entry(builder, old_form, new_form):
    e = builder.entries.pop(old_form)
    e.form = new_form
    builder.entries[new_form] = e
    return e


def far_predicate(builder, cls, nonces):
    tails = list(builder.reserved_tails)

    def ok(cand):
        if any(cand.endswith(t) for t in tails):
            return False
        return all(
            abs(len(cand) - len(x)) > 2 or distance(cand, x) > 2 for x in nonces
        )

    return ok


def pick_mass(builder, cls, choice, needed, tag_note):
    """Pull diffuse entries of at least `needed` total count, largest-last."""
    pool = renameable(builder, cls, choice)
    chosen = []
    total = 0
    # prefer a single close match, else accumulate from the top
    for count, form in pool:
        if count >= needed:
            return [(count, form)]
    for count, form in reversed(pool):
        chosen.append((count, form))
        total += count
        if total >= needed:
            return chosen
        if len(chosen) >= 6:
            break
    raise RuntimeError(f"cannot collect {needed} tokens of {cls}/{choice} for {tag_note}")


def usable_dilution_tails(builder, ctx, all_nonces):
    """Slot-child tails where new mass may be placed without entering a
    reserved family zone or hugging a nonce."""
    if ctx.slot is None:
        cands = [ctx.literal]
    elif ctx.slot == "?":
        cands = [c + ctx.literal for c in "bdgmpv"]
    else:
        cands = [c + ctx.literal for c in sorted(ctx.slot)]
    out = []
    for tail in cands:
        if any(tail.endswith(rt) or rt.endswith(tail) for rt in builder.reserved_tails):
            continue
        out.append(tail)
    return out


def dilute_rule(builder, cls, rule, mean_token, all_nonces, factor=1.4):
    """Make a leaked rule unreliable by renaming opposite-side mass into it.

    Returns None when no slot child is usable (fully reserved contexts)."""
    choice = "ity" if rule.output is N else "ness"
    ctx = rule.context
    inner_tails = usable_dilution_tails(builder, ctx, all_nonces)
    if not inner_tails:
        return None
    needed = int(rule.hits * mean_token * factor)
    picks = pick_mass(builder, cls, choice, needed, ctx.render())
    pred = far_predicate(builder, cls, all_nonces)
    made = []
    for j, (_count, form) in enumerate(picks):
        tail = inner_tails[j % len(inner_tails)]
        length = max(len(tail) + 2, len(form))
        new = builder.factory.fresh_with_tail(tail, length, pred)
        rename_entry(builder, form, new).tag = "dilute"
        made.append(new)
    return made


def boost_own_tokens(builder, spec, choice, target_tokens):
    """Swap a bigger diffuse count onto the item's heaviest family member."""
    members = [
        (getattr(e, choice), form)
        for form, e in builder.entries.items()
        if e.tag == f"slot:{spec.item}" and getattr(e, choice) > 0
    ]
    if not members:
        return False
    members.sort(reverse=True)
    cur, form = members[0]
    pool = renameable(builder, spec.cls, choice)
    bigger = [p for p in pool if p[0] >= target_tokens]
    if not bigger:
        bigger = pool[-1:]
    donor_count, donor_form = bigger[0]
    if donor_count <= cur:
        return False
    e_fam = builder.entries[form]
    e_don = builder.entries[donor_form]
    setattr(e_fam, choice, donor_count)
    setattr(e_don, choice, cur)
    return True


def boost_own_types(builder, spec, winner_level, choice, n, all_nonces):
    """Add n same-side members at the item's own family level."""
    q = spec.item
    own_next = q[-(len(winner_level) + 1)] if len(q) > len(winner_level) else ""
    slot_chars = [c for c in "bcdfglmnprstvw" if c != own_next]
    picks = renameable(builder, spec.cls, choice)[:n]
    made = []
    for j, (_cnt, form) in enumerate(picks):
        tail = slot_chars[j % 5] + winner_level
        new = builder.factory.fresh_with_tail(tail, max(len(tail) + 2, len(form)))
        rename_entry(builder, form, new).tag = f"slot:{q}"
        made.append(new)
    return made


def gcm_push(builder, item, cls, tail, choice, needed_units, sensitivity, all_nonces, cluster):
    """Add near-mutant mass of `choice` at distance 1 worth `needed_units`."""
    import math

    per_unit = math.exp(-sensitivity)  # similarity of a distance-1 neighbor
    needed_tokens = int(needed_units / per_unit) + 1
    picks = pick_mass(builder, cls, choice, needed_tokens, f"gcm:{item}")
    others = [x for x in all_nonces if x not in cluster]
    forms = near_mutant_forms(builder, item, cls, tail, len(picks), others)
    made = []
    for (count, form), new in zip(picks, forms):
        rename_entry(builder, form, new).tag = f"ext:{item}"
        made.append(new)
    return made


def near_mutant_forms(builder, q, cls, tail, wanted, other_nonces):
    suffix_len = {"able": 4, "al": 2, "ar": 2, "ed": 2, "ic": 2, "ing": 3,
                  "ish": 3, "ive": 3, "less": 4, "ous": 3}[cls]
    letters = "abcdefghijklmnopqrstuvwy"
    positions = [len(q) - suffix_len - 1, len(q) - suffix_len - 2]
    candidates = []
    for pos in positions:
        if pos < 1:
            continue
        for ch in letters:
            if ch != q[pos]:
                candidates.append(q[:pos] + ch + q[pos + 1:])
            candidates.append(q[:pos] + ch + q[pos:])
    p0, p1 = positions[0], positions[1]
    if p1 >= 1:
        for ch0 in letters[:12]:
            for ch1 in "lnrstbdg":
                if ch0 != q[p0] and ch1 != q[p1]:
                    candidates.append(q[:p1] + ch1 + q[p1 + 1:p0] + ch0 + q[p0 + 1:])
    out = []
    for cand in candidates:
        if len(out) >= wanted:
            break
        if cand in builder.factory.used:
            continue
        if tail and cand.endswith(tail):
            continue
        if any(cand.endswith(rt) for rt in builder.reserved_tails):
            continue
        if any(
            abs(len(cand) - len(x)) <= 2 and distance(cand, x) <= 2
            for x in other_nonces
        ):
            continue
        out.append(cand)
        builder.factory.claim(cand)
    if len(out) < wanted:
        raise RuntimeError(f"not enough repair mutants for {q}")
    return out


def drain_rule(builder, cls, rule, bench_entries, token_mode, all_nonces, keep_fraction=0.3):
    """Rename the biggest diffuse contributors out of a leaked rule context."""
    ctx = rule.context
    choice = "ity" if rule.output is I else "ness"
    contributors = []
    for form, e in builder.entries.items():
        if e.cls != cls or not ctx.matches(form):
            continue
        if e.tag.startswith(("slot:", "ext:", "anchor")):
            continue
        weight = getattr(e, choice)
        other = e.ness if choice == "ity" else e.ity
        if weight > 0 and other == 0:
            contributors.append((weight if token_mode else 1, weight, form))
    contributors.sort(reverse=True)
    total = sum(c[0] for c in contributors)
    target = total * keep_fraction
    pred_far = far_predicate(builder, cls, all_nonces)

    def pred(cand):
        return pred_far(cand) and not ctx.matches(cand)

    drained = []
    removed = 0.0
    for share, _weight, form in contributors:
        if total - removed <= target or len(drained) >= 25:
            break
        new = builder.factory.fresh(cls, max(8, len(form)), pred)
        rename_entry(builder, form, new).tag = "drained"
        removed += share
        drained.append(new)
    return drained


def gcm_drain_opposite(builder, sim_row, weights, exemplars, want_ity, deficit,
                       all_nonces, max_k=10):
    """Move the biggest wrong-side exemplar contributors far away.

    Only diffuse single-choice entries move; returns the contribution mass
    removed (same units as the similarity sums)."""
    contrib = sim_row * weights
    order = contrib.argsort()[::-1]
    removed = 0.0
    moved = 0
    for j in order[:400]:
        if removed >= deficit or moved >= max_k:
            break
        e_x = exemplars[j]
        if (e_x.choice is I) != (not want_ity):
            continue  # not the opposing side
        entry = builder.entries.get(e_x.form)
        if entry is None or entry.tag.startswith(("slot:", "ext:", "anchor")):
            continue
        if entry.ity > 0 and entry.ness > 0:
            continue
        if contrib[j] < deficit * 0.02:
            break
        move_away(builder, e_x.form, entry.cls, all_nonces)
        removed += contrib[j]
        moved += 1
    return removed, moved


def move_away(builder, form, cls, all_nonces):
    pred = far_predicate(builder, cls, all_nonces)
    new = builder.factory.fresh(cls, max(8, len(form)), pred)
    rename_entry(builder, form, new).tag = "moved"
    return new
