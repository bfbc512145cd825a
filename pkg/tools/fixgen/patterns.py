"""Target prediction patterns for the variable-class nonce items.

A pattern is (mgl_type, mgl_token, gcm_type, gcm_token) as ity/ness flags.
The per-class cell compositions realize the pairwise model-disagreement
counts needed by the reference accuracy tables and significance marks, and
the human-majority counts per cell realize the human-match table.
"""

from __future__ import annotations

from dataclasses import dataclass

from ityness.morphlex import SuffixChoice

I, N = SuffixChoice.ITY, SuffixChoice.NESS

# disagreement cells: pattern name -> which of the four models answer NESS
CELL_NESS = {
    "P0": frozenset(),
    "P1234": frozenset({0, 1, 2, 3}),
    "P1": frozenset({0}),
    "P2": frozenset({1}),
    "P3": frozenset({2}),
    "P4": frozenset({3}),
    "P23": frozenset({1, 2}),
    "P24": frozenset({1, 3}),
    "P34": frozenset({2, 3}),
}

# cell -> (item count, count of items whose human majority is NESS)
IVE_CELLS = {
    "P0": (33, 7),
    "P1234": (8, 5),
    "P4": (2, 0),
    "P34": (2, 2),
    "P2": (2, 1),
    "P24": (1, 0),
    "P3": (1, 1),
    "P23": (1, 0),
}
OUS_CELLS = {
    "P0": (24, 10),
    "P1234": (14, 7),
    "P34": (1, 1),
    "P2": (2, 0),
    "P24": (4, 0),
    "P3": (1, 0),
    "P1": (1, 0),
    "P23": (3, 3),
}

# items that must land in specific cells / human groups
PINNED_CELL = {
    "pepulative": ("P4", I),      # rules say ity, token exemplars say ness
    "rebelorous": ("P1234", N),   # unanimous ness item
    "indaminous": ("P0", I),      # strong ity item
}


@dataclass(frozen=True)
class ItemTarget:
    item: str
    cls: str
    pattern: str
    human: SuffixChoice

    def model_ness(self) -> tuple[bool, bool, bool, bool]:
        members = CELL_NESS[self.pattern]
        return tuple(m in members for m in range(4))


def _clusters(items: list[str]) -> list[list[str]]:
    """Group items whose edit distance is <= 2 (they share neighborhoods)."""
    from ityness.gcm import distance

    parent = {w: w for w in items}

    def find(w):
        while parent[w] != w:
            parent[w] = parent[parent[w]]
            w = parent[w]
        return w

    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if abs(len(a) - len(b)) <= 2 and distance(a, b) <= 2:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
    groups = {}
    for w in items:
        groups.setdefault(find(w), []).append(w)
    return sorted(groups.values(), key=lambda g: (-len(g), g[0]))


def assign_targets(cls: str, items: list[str]) -> list[ItemTarget]:
    """Deterministically map items to cells, keeping distance-2 clusters
    in the same cell and honoring the pinned items."""
    cells = IVE_CELLS if cls == "ive" else OUS_CELLS
    budget = {name: [count, ness_h] for name, (count, ness_h) in cells.items()}
    assignment: dict[str, str] = {}
    human: dict[str, SuffixChoice] = {}

    for item, (cell, h) in PINNED_CELL.items():
        if item in items:
            assignment[item] = cell
            human[item] = h
            budget[cell][0] -= 1
            if h is N:
                budget[cell][1] -= 1

    clusters = _clusters([w for w in items if w not in assignment])
    # place big clusters in big cells first
    order = sorted(budget, key=lambda c: -budget[c][0])
    for group in clusters:
        placed = False
        for cell in order:
            if budget[cell][0] >= len(group):
                for w in group:
                    assignment[w] = cell
                    budget[cell][0] -= 1
                placed = True
                break
        if not placed:
            raise RuntimeError(f"cannot place cluster {group}")
        order = sorted(budget, key=lambda c: -budget[c][0])

    # hand out the remaining human-NESS budget inside each cell
    for cell, (count, _h) in cells.items():
        members = sorted(w for w, c in assignment.items() if c == cell and w not in human)
        need = budget[cell][1]
        if need < 0 or need > len(members):
            raise RuntimeError(f"human budget broken in cell {cell}: {need}")
        for w in members[:need]:
            human[w] = N
        for w in members[need:]:
            human[w] = I

    out = [ItemTarget(w, cls, assignment[w], human[w]) for w in sorted(items)]
    # sanity: cell sizes and ness counts match the plan
    got = {}
    for t in out:
        got.setdefault(t.pattern, [0, 0])
        got[t.pattern][0] += 1
        if t.human is N:
            got[t.pattern][1] += 1
    for cell, (count, ness_h) in cells.items():
        if count and tuple(got.get(cell, (0, 0))) != (count, ness_h):
            raise RuntimeError(f"cell {cell}: want {(count, ness_h)}, got {got.get(cell)}")
    return out
