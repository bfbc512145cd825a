"""Simulated annealing for per-item probe-winner counts and preferences.

Per class the variables are k_i (how many of the 12 prompts prefer ity for
item i) and the forced-choice preference G_i. Constraints are exact integer
agreement totals against the four model prediction vectors and the human
majority vector, plus exact-McNemar significance windows against the best
model.
"""

from __future__ import annotations

import random

from ityness.morphlex import SuffixChoice
from ityness.stats import mcnemar_exact

I, N = SuffixChoice.ITY, SuffixChoice.NESS
PROMPTS = 12


def agreement_target(acc: float, n_items: int, per_item: int) -> int:
    return round(acc * n_items * per_item)


def k_agreement(k, reference):
    """Total prompt-level agreement of winner counts with a binary vector."""
    total = 0
    for ki, ref in zip(k, reference):
        total += ki if ref is I else PROMPTS - ki
    return total


def mcnemar_for_pair(k, m_a, m_b):
    """Exact McNemar p for two models given per-item ity-prompt counts."""
    a_matches, b_matches = [], []
    for ki, ra, rb in zip(k, m_a, m_b):
        # expand virtually: ki prompts answered ity, the rest ness
        for _ in range(ki):
            a_matches.append(ra is I)
            b_matches.append(rb is I)
        for _ in range(PROMPTS - ki):
            a_matches.append(ra is N)
            b_matches.append(rb is N)
    return mcnemar_exact(a_matches, b_matches)


def solve_k(
    models: dict[str, list[SuffixChoice]],
    human: list[SuffixChoice],
    model_targets: dict[str, int],
    human_target: int,
    daggers: set[str],
    best_model: str,
    pinned: dict[int, int],
    seed: int,
    max_iter: int = 400_000,
):
    """Find k_i hitting every agreement total and significance window."""
    names = sorted(models)
    n = len(human)

    def energy(kvec):
        e = 0
        for name in names:
            e += abs(k_agreement(kvec, models[name]) - model_targets[name])
        e += abs(k_agreement(kvec, human) - human_target)
        return e

    best = None
    for restart in range(12):
        rng = random.Random(seed + 1000 * restart)
        k = [rng.randint(3, 12) for _ in range(n)]
        for idx, value in pinned.items():
            k[idx] = value
        cur = energy(k)
        for step in range(max_iter):
            if cur == 0:
                break
            if rng.random() < 0.5:
                i = rng.randrange(n)
                if i in pinned:
                    continue
                old = k[i]
                new = min(PROMPTS, max(0, old + rng.choice((-2, -1, 1, 2))))
                if new == old:
                    continue
                k[i] = new
                e = energy(k)
                if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.4):
                    cur = e
                else:
                    k[i] = old
            else:
                i, j = rng.randrange(n), rng.randrange(n)
                if i == j or i in pinned or j in pinned:
                    continue
                if k[i] >= PROMPTS or k[j] <= 0:
                    continue
                k[i] += 1
                k[j] -= 1
                e = energy(k)
                if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.4):
                    cur = e
                else:
                    k[i] -= 1
                    k[j] += 1
        if cur == 0:
            best = list(k)
            break
    if best is None:
        raise RuntimeError(f"solve_k stuck at energy {cur}")
    # significance pattern is determined by the agreements; verify it
    for name in names:
        if name == best_model:
            continue
        p = mcnemar_for_pair(best, models[name], models[best_model])
        if name in daggers:
            assert p < 0.05, (name, p)
        else:
            assert p >= 0.05, (name, p)
    return best


def solve_g(
    models: dict[str, list[SuffixChoice]],
    human: list[SuffixChoice],
    model_targets: dict[str, int],
    human_target: int,
    seed: int,
    max_iter: int = 200_000,
):
    """Binary preferences hitting agreement counts with models and humans."""
    names = sorted(models)
    n = len(human)

    def agree(gvec, ref):
        return sum(1 for a, b in zip(gvec, ref) if a is b)

    def energy(gvec):
        e = 0
        for name in names:
            e += abs(agree(gvec, models[name]) - model_targets[name])
        e += abs(agree(gvec, human) - human_target)
        return e

    for restart in range(20):
        rng = random.Random(seed + 911 * restart)
        g = [rng.choice((I, N)) for _ in range(n)]
        cur = energy(g)
        for step in range(max_iter):
            if cur == 0:
                return g
            i = rng.randrange(n)
            g[i] = N if g[i] is I else I
            e = energy(g)
            if e <= cur or rng.random() < pow(2.718, -(e - cur) / 0.35):
                cur = e
            else:
                g[i] = N if g[i] is I else I
        if cur == 0:
            return g
    raise RuntimeError(f"solve_g stuck at energy {cur}")
