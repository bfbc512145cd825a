"""Exact token-count multisets per (class, choice).

Each pool is a list of positive integers with: exact element count (the type
frequency), exact number of ones (hapaxes), exact sum (mean * types after
rounding), and for -ous an exact top-5%-trimmed structure.
"""

from __future__ import annotations

import random


def _long_tail(rng: random.Random, n: int, lo: int, alpha: float, cap: int) -> list[int]:
    out = []
    for _ in range(n):
        v = int(lo * rng.paretovariate(alpha))
        out.append(max(lo, min(v, cap)))
    return out


def _force_sum(values: list[int], target: int, floor: int, cap: int) -> list[int]:
    """Adjust values (respecting floor/cap) until they sum to target."""
    values = list(values)
    diff = target - sum(values)
    # proportional rescale first when far off
    if abs(diff) > 0.05 * max(target, 1) and sum(values) > 0:
        scale = (target - floor * len(values)) / max(1, sum(values) - floor * len(values))
        if scale > 0:
            values = [
                min(cap, max(floor, floor + int(round((v - floor) * scale))))
                for v in values
            ]
        diff = target - sum(values)
    idx = 0
    order = sorted(range(len(values)), key=lambda i: -values[i])
    while diff != 0:
        i = order[idx % len(order)]
        if diff > 0 and values[i] < cap:
            step = min(diff, cap - values[i])
            values[i] += step
            diff -= step
        elif diff < 0 and values[i] > floor:
            step = min(-diff, values[i] - floor)
            values[i] -= step
            diff += step
        idx += 1
        if idx > 10_000_000:
            raise RuntimeError("cannot reach target sum")
    return values


def build_pool(
    rng: random.Random,
    types: int,
    hapaxes: int,
    total: int,
    cap: int = 400_000,
    alpha: float = 0.85,
) -> list[int]:
    """Counts for one (class, choice): `hapaxes` ones, the rest >= 2, exact sum."""
    if types == 0:
        assert total == 0 and hapaxes == 0
        return []
    assert hapaxes <= types
    rest_n = types - hapaxes
    rest_total = total - hapaxes
    if rest_n == 0:
        assert rest_total == 0, "hapax-only pool with leftover mass"
        return [1] * hapaxes
    assert rest_total >= 2 * rest_n, "mean too small for non-hapax floor of 2"
    rest = _long_tail(rng, rest_n, 2, alpha, cap)
    rest = _force_sum(rest, rest_total, 2, cap)
    return sorted([1] * hapaxes + rest)


def build_trimmed_pool(
    rng: random.Random,
    types: int,
    hapaxes: int,
    total: int,
    trimmed_mean: float,
    trim_k: int,
    cap: int = 700_000,
) -> list[int]:
    """Pool whose bottom (types - trim_k) values average to trimmed_mean."""
    bottom_n = types - trim_k
    bottom_total = round(trimmed_mean * bottom_n)
    top_total = total - bottom_total
    assert top_total > 0 and trim_k > 0
    # bottom: hapaxes plus a modest tail, capped so the top stays separated
    bottom_cap = max(4, int(trimmed_mean * 6))
    rest_n = bottom_n - hapaxes
    rest = _long_tail(rng, rest_n, 2, 1.1, bottom_cap)
    rest = _force_sum(rest, bottom_total - hapaxes, 2, bottom_cap)
    bottom = [1] * hapaxes + rest
    top_floor = bottom_cap + 1
    assert top_total >= top_floor * trim_k
    top = _long_tail(rng, trim_k, top_floor, 0.7, cap)
    top = _force_sum(top, top_total, top_floor, cap)
    pool = sorted(bottom + top)
    assert len(pool) == types and sum(pool) == total
    assert sum(1 for v in pool if v == 1) == hapaxes
    got_trim = sum(sorted(pool)[: types - trim_k]) / (types - trim_k)
    assert abs(got_trim - trimmed_mean) < 0.05, got_trim
    return pool


def ensure_values(pool: list[int], needed: list[int], floor: int = 2) -> list[int]:
    """Swap pool entries so that every value in `needed` appears, keeping the sum.

    Replaces the closest free entries and repairs the sum difference on the
    largest remaining entries.
    """
    pool = sorted(pool)
    taken = []
    for value in needed:
        best_i = min(
            (i for i in range(len(pool)) if i not in taken),
            key=lambda i: (abs(pool[i] - value), pool[i]),
        )
        taken.append(best_i)
    diff = 0
    for i, value in zip(taken, needed):
        diff += pool[i] - value
        pool[i] = value
    # repair the sum on entries not pinned
    free = [i for i in range(len(pool)) if i not in taken and pool[i] >= floor]
    j = 0
    while diff != 0 and free:
        i = free[j % len(free)]
        if diff > 0:
            pool[i] += diff
            diff = 0
        else:
            step = min(-diff, pool[i] - floor)
            pool[i] -= step
            diff += step
        j += 1
    assert diff == 0, "could not preserve pool sum"
    return sorted(pool)
