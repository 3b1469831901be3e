# modules/exact_cover.py

import random
from collections import defaultdict
from itertools import combinations
from typing import AbstractSet, Collection, Dict, FrozenSet, Hashable, Iterable, List, Optional, Set, Tuple

from core.errors import DomainError, SearchBudgetError
from core.log import vlog

Chunk = FrozenSet[Hashable]
Pair = Tuple[int, int]


class ExactCoverSolver:
    """Algorithm X over a dictionary of memberships.

    Branches on the uncovered element with the fewest candidate subsets and
    stops after `budget` nodes.
    """

    def __init__(self, pieces: Collection[Hashable], subsets: Iterable[AbstractSet], budget: int = 1_000_000,
                 seed: Optional[int] = None):
        self.subsets: List[Chunk] = [frozenset(s) for s in subsets]
        if seed is not None:
            random.Random(seed).shuffle(self.subsets)
        self.membership: Dict[Hashable, List[Chunk]] = defaultdict(list)
        for subset in self.subsets:
            for element in subset:
                self.membership[element].append(subset)
        self.elements = frozenset(pieces)
        self.failed = not all(self.membership[elem] for elem in self.elements)
        self.budget = budget
        self.nodes = 0

    def solve(self) -> Optional[List[Chunk]]:
        if self.failed:
            return None
        return self._solve(set(), [])

    def _solve(self, covered: Set, selected: List[Chunk]) -> Optional[List[Chunk]]:
        self.nodes += 1
        if self.nodes > self.budget:
            raise SearchBudgetError(f"exact cover exceeded {self.budget} nodes")
        if len(covered) == len(self.elements):
            return list(selected)

        best, best_options = None, None
        for elem in self.elements - covered:
            options = [s for s in self.membership[elem] if covered.isdisjoint(s)]
            if best_options is None or len(options) < len(best_options):
                best, best_options = elem, options
                if not options:
                    return None
        for subset in best_options:
            covered |= subset
            selected.append(subset)
            out = self._solve(covered, selected)
            if out is not None:
                return out
            selected.pop()
            covered -= subset
        return None


def pairs_of(block: Iterable[int]) -> List[Pair]:
    return list(combinations(sorted(block), 2))


# -------------------------------------------------------------------
# Coverings by triples (at-least-once)
# -------------------------------------------------------------------

def cover_pairs(n: int, pairs: Iterable[Pair], max_blocks: int, budget: int = 200_000,
                seed: Optional[int] = None) -> Optional[List[Tuple[int, int, int]]]:
    """Fewest triples on 1..n (at most max_blocks) covering every given pair."""
    todo = sorted({tuple(sorted(p)) for p in pairs})
    if not todo:
        return []
    rng = random.Random(seed) if seed is not None else None
    nodes = 0

    def search(remaining: List[Pair], depth: int, chosen: List[Tuple[int, int, int]]):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetError(f"pair covering exceeded {budget} nodes")
        if not remaining:
            return list(chosen)
        # each triple covers at most three pairs
        if len(remaining) > 3 * depth:
            return None
        x, y = remaining[0]
        thirds = [z for z in range(1, n + 1) if z not in (x, y)]
        gain = {z: sum(1 for p in remaining if set(p) <= {x, y, z}) for z in thirds}
        thirds.sort(key=lambda z: (-gain[z], z))
        if rng is not None:
            rng.shuffle(thirds)
            thirds.sort(key=lambda z: -gain[z])
        for z in thirds:
            triple = tuple(sorted((x, y, z)))
            rest = [p for p in remaining if not set(p) <= set(triple)]
            chosen.append(triple)
            out = search(rest, depth - 1, chosen)
            if out is not None:
                return out
            chosen.pop()
        return None

    for depth in range(1, max_blocks + 1):
        found = search(todo, depth, [])
        if found is not None:
            vlog("cover", f"{len(todo)} pairs covered by {len(found)} triples ({nodes} nodes)")
            return found
    return None


def min_covering_size(n: int, budget: int = 5_000_000) -> int:
    """Smallest (n,3,2)-covering by exhaustive branch and bound; small n only."""
    if n < 3:
        raise DomainError(f"coverings need n >= 3, got {n}")
    if n > 8:
        raise DomainError("exhaustive covering search is limited to n <= 8")
    every = pairs_of(range(1, n + 1))
    # iterative deepening on the block count makes the first hit minimum
    found = cover_pairs(n, every, len(every), budget=budget)
    return len(found)


# -------------------------------------------------------------------
# Pairwise balanced designs
# -------------------------------------------------------------------

def search_pbd(v: int, sizes: Iterable[int], budget: int = 1_000_000, seed: Optional[int] = None
               ) -> Optional[List[Tuple[int, ...]]]:
    """PBD(v, sizes) as an exact cover of the pairs of 1..v by candidate blocks."""
    K = sorted(k for k in set(sizes) if 2 < k <= v)
    universe = pairs_of(range(1, v + 1))
    candidates = []
    for k in K:
        for block in combinations(range(1, v + 1), k):
            candidates.append(frozenset(pairs_of(block)))
    solver = ExactCoverSolver(universe, candidates, budget=budget, seed=seed)
    solution = solver.solve()
    vlog("pbd", f"PBD({v},{K}) search used {solver.nodes} nodes")
    if solution is None:
        return None
    blocks = []
    for chunk in solution:
        pts = sorted({p for pair in chunk for p in pair})
        blocks.append(tuple(pts))
    return sorted(blocks)
