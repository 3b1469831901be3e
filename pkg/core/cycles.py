# core/cycles.py

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from core.design import SetSystem
from core.errors import ConstructionError, PreconditionError, SearchBudgetError
from core.log import vlog
from models import VerificationReport


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------

@dataclass(frozen=True)
class ColoredCycle:
    """Cyclic block-index sequence; joins[i] colors the edge (blocks[i], blocks[i+1])."""

    blocks: Tuple[int, ...]
    joins: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))
        object.__setattr__(self, "joins", tuple(int(c) for c in self.joins))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def colors(self) -> FrozenSet[int]:
        return frozenset(self.joins)

    @property
    def degenerate(self) -> bool:
        return len(self.blocks) == 1

    def shifted(self, offset: int) -> "ColoredCycle":
        """Same cycle with block indices moved by offset (host concatenation)."""
        return ColoredCycle(tuple(b + offset for b in self.blocks), self.joins)

    def relabeled(self, points: Dict[int, int]) -> "ColoredCycle":
        return ColoredCycle(self.blocks, tuple(points[c] for c in self.joins))


class BIGraph:
    """Edge-colored block intersection multigraph: one edge per shared point."""

    def __init__(self, s: SetSystem):
        self.system = s
        self.graph = nx.MultiGraph()
        self.graph.add_nodes_from(range(len(s.blocks)))
        sets = s.block_sets
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                for color in sorted(sets[i] & sets[j]):
                    self.graph.add_edge(i, j, key=color, color=color)

    def multiplicity(self, i: int, j: int) -> int:
        return self.graph.number_of_edges(i, j)

    def colors(self, i: int, j: int) -> FrozenSet[int]:
        if not self.graph.has_edge(i, j):
            return frozenset()
        return frozenset(self.graph[i][j])

    def neighbors(self, i: int) -> List[Tuple[int, int]]:
        return sorted((j, k) for _, j, k in self.graph.edges(i, keys=True))


def build_big(s: SetSystem) -> BIGraph:
    return BIGraph(s)


# -------------------------------------------------------------------
# Verification
# -------------------------------------------------------------------

def verify_cah(s: SetSystem, c: ColoredCycle, require_colorful: bool = False) -> VerificationReport:
    report = VerificationReport()
    m = len(c.blocks)
    b = len(s.blocks)
    sets = s.block_sets

    if len(c.joins) != m and not (m == 1 and not c.joins):
        report.add("bad-join", f"{m} blocks but {len(c.joins)} joins")
        return report
    if m == 0:
        report.add("not-hamiltonian", "empty cycle", [])
        return report
    if m == 2:
        report.add("not-hamiltonian", "two blocks do not form a simple cycle", list(c.blocks))
        return report
    out = [i for i in c.blocks if not 0 <= i < b]
    if out:
        report.add("out-of-range", f"block indices {out} outside host of {b} blocks", out)
        return report

    if sorted(c.blocks) != list(range(b)):
        report.add("not-hamiltonian", f"cycle visits {m} blocks, host has {b} (each must appear once)",
                   sorted(set(range(b)).symmetric_difference(c.blocks)) or list(c.blocks))
    if m == 1:
        report.colorful = True
        return report

    for i in range(m):
        a, nxt = c.blocks[i], c.blocks[(i + 1) % m]
        if c.joins[i] not in sets[a] & sets[nxt]:
            report.add("bad-join", f"join {c.joins[i]} at position {i} not in {sorted(sets[a] & sets[nxt])}", [i])
        if c.joins[i - 1] == c.joins[i]:
            report.add("not-alternating", f"block at position {i} has both joins {c.joins[i]}", [i])

    used = set(c.joins)
    report.colorful = used >= set(s.points())
    if require_colorful and not report.colorful:
        report.add("not-colorful", f"colors never used: {sorted(set(s.points()) - used)}",
                   sorted(set(s.points()) - used))
    return report


# -------------------------------------------------------------------
# Joins
# -------------------------------------------------------------------

def infer_joins(s: SetSystem, block_order: Sequence[int], require_colorful: bool = False,
                budget: int = 200_000) -> ColoredCycle:
    """Backtracking choice of one color per adjacency, ascending candidates first."""
    order = tuple(block_order)
    m = len(order)
    if m == 1:
        return ColoredCycle(order, ())
    if m == 2:
        raise PreconditionError("two blocks do not form a simple cycle")
    sets = s.block_sets
    options = [sorted(sets[order[i]] & sets[order[(i + 1) % m]]) for i in range(m)]
    for i, opt in enumerate(options):
        if not opt:
            raise PreconditionError(f"no valid join assignment: blocks at positions {i} and "
                                    f"{(i + 1) % m} are disjoint")

    everything = set(s.points())
    chosen: List[int] = []
    nodes = 0

    def extend(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetError("join inference exceeded its budget")
        if i == m:
            if chosen[-1] == chosen[0]:
                return False
            return not require_colorful or set(chosen) >= everything
        for color in options[i]:
            if i and chosen[-1] == color:
                continue
            chosen.append(color)
            if extend(i + 1):
                return True
            chosen.pop()
        return False

    if not extend(0):
        # first adjacency the forward pass cannot satisfy
        bad = next((i for i in range(1, m) if options[i] == options[i - 1] and len(options[i]) == 1),
                   m - 1)
        raise PreconditionError(f"no valid join assignment; first unsatisfiable adjacency at position {bad}")
    return ColoredCycle(order, tuple(chosen))


# -------------------------------------------------------------------
# Merging
# -------------------------------------------------------------------

def merge_cycles(c1: ColoredCycle, c2: ColoredCycle, at: Tuple[int, int]) -> ColoredCycle:
    """Swap edge (a,b) of c1 and (c,d) of c2, both colored x, for (a,c),(b,d)."""
    i, j = at
    m1, m2 = len(c1), len(c2)
    if m1 < 3 or m2 < 3:
        raise PreconditionError("merge_cycles needs two proper cycles (length >= 3)")
    if set(c1.blocks) & set(c2.blocks):
        raise PreconditionError(f"cycles share blocks {sorted(set(c1.blocks) & set(c2.blocks))}")
    x = c1.joins[i]
    if c2.joins[j] != x:
        raise PreconditionError(f"edge colors differ: {x} vs {c2.joins[j]}")

    walk = tuple(c2.blocks[(j - s) % m2] for s in range(m2))
    walk_joins = tuple(c2.joins[(j - 1 - s) % m2] for s in range(m2 - 1))
    blocks = c1.blocks[: i + 1] + walk + c1.blocks[i + 1:]
    joins = c1.joins[:i] + (x,) + walk_joins + (x,) + c1.joins[i + 1:]
    return ColoredCycle(blocks, joins)


def insert_block(c: ColoredCycle, index: int, s: SetSystem) -> Optional[ColoredCycle]:
    """Splice a lone block between two neighbours of c; None when no position fits."""
    sets = s.block_sets
    t = sets[index]
    m = len(c)
    if m < 3:
        return None
    for i in range(m):
        prev_join, next_join = c.joins[i - 1], c.joins[(i + 1) % m]
        left, right = sets[c.blocks[i]], sets[c.blocks[(i + 1) % m]]
        for x in sorted(t & left):
            if x == prev_join:
                continue
            for y in sorted(t & right):
                if y == x or y == next_join:
                    continue
                blocks = c.blocks[: i + 1] + (index,) + c.blocks[i + 1:]
                joins = c.joins[:i] + (x, y) + c.joins[i + 1:]
                return ColoredCycle(blocks, joins)
    return None


def _merge_positions(a: ColoredCycle, b: ColoredCycle) -> Iterable[Tuple[int, int]]:
    first: Dict[int, int] = {}
    for j, color in enumerate(b.joins):
        first.setdefault(color, j)
    for i, color in enumerate(a.joins):
        if color in first:
            yield i, first[color]


def assemble(cycles: Iterable[ColoredCycle], host: SetSystem, budget: int = 100_000,
             seeds: Optional[Set[int]] = None, require_colorful: bool = False) -> ColoredCycle:
    """Merge block-disjoint cycles sharing join colors into one hamiltonian cycle."""
    pool = [c for c in cycles]
    if not pool:
        raise PreconditionError("assemble needs at least one cycle")
    seeds = seeds or set()

    if len(pool) > 1:
        proper = [c for c in pool if not c.degenerate]
        if not proper:
            raise ConstructionError("only single-block cycles; nothing to splice into")
        g = nx.Graph()
        g.add_nodes_from(range(len(pool)))
        by_color: Dict[int, List[int]] = {}
        for idx, c in enumerate(pool):
            touch = host.block_sets[c.blocks[0]] if c.degenerate else c.colors
            for color in touch:
                by_color.setdefault(color, []).append(idx)
        for members in by_color.values():
            nx.add_path(g, members)
        parts = list(nx.connected_components(g))
        if len(parts) > 1:
            witness = [sorted(p) for p in parts]
            raise ConstructionError(f"color-sharing graph has {len(parts)} components", witness=witness)

    def seeded(c: ColoredCycle) -> bool:
        return any(b in seeds for b in c.blocks)

    start = max(range(len(pool)),
                key=lambda k: (not pool[k].degenerate, seeded(pool[k]), len(pool[k]), -k))
    rest = [c for k, c in enumerate(pool) if k != start]
    nodes = 0

    def grow(current: ColoredCycle, remaining: List[ColoredCycle]) -> Optional[ColoredCycle]:
        nonlocal nodes
        if not remaining:
            return current
        colors = current.colors
        sets = host.block_sets

        def score(c: ColoredCycle):
            shared = len(sets[c.blocks[0]] & colors) if c.degenerate else len(c.colors & colors)
            return (seeded(c), shared, len(c))

        candidates = sorted((k for k in range(len(remaining))
                             if score(remaining[k])[1] > 0),
                            key=lambda k: score(remaining[k]), reverse=True)
        for k in candidates:
            nodes += 1
            if nodes > budget:
                return None
            other = remaining[k]
            tail = remaining[:k] + remaining[k + 1:]
            if other.degenerate:
                merged = insert_block(current, other.blocks[0], host)
                if merged is None:
                    continue
                out = grow(merged, tail)
                if out is not None:
                    return out
                continue
            # a color-sharing merge never disconnects the rest, so one position suffices
            pos = next(iter(_merge_positions(current, other)), None)
            if pos is None:
                continue
            out = grow(merge_cycles(current, other, pos), tail)
            if out is not None:
                return out
        return None

    result = grow(pool[start], rest)
    if result is None:
        raise ConstructionError(f"assemble exhausted its budget after {nodes} nodes",
                                witness=[len(c) for c in pool])
    report = verify_cah(host, result, require_colorful)
    if not report.valid:
        raise ConstructionError("assembled cycle failed verification", report=report)
    vlog("assemble", f"merged {len(pool)} cycles into one of length {len(result)} ({nodes} nodes)")
    return result


# -------------------------------------------------------------------
# Search
# -------------------------------------------------------------------

def find_alternating_cycle(s: SetSystem, require_colorful: bool = False, budget: int = 200_000,
                           seed: int = 0) -> ColoredCycle:
    """Randomized depth-first search for an alternating hamiltonian cycle.

    Neighbours with the fewest unvisited continuations are tried first
    (Warnsdorff order); ties are broken by a seeded shuffle, and the search
    restarts with a fresh shuffle whenever a slice of the budget is spent.
    """
    m = len(s.blocks)
    if m == 1:
        return ColoredCycle((0,), ())
    if m < 3:
        raise PreconditionError("no simple cycle on fewer than three blocks")
    sets = s.block_sets
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            for color in sets[i] & sets[j]:
                adj[i].append((j, color))
                adj[j].append((i, color))
    everything = set(s.points())
    rng = random.Random(seed)
    spent = 0
    slice_size = max(1000, budget // 20)

    while spent < budget:
        for lst in adj:
            rng.shuffle(lst)
        visited = [False] * m
        visited[0] = True
        path = [0]
        joins: List[int] = []
        nodes = 0
        limit = min(slice_size, budget - spent)

        def free_degree(v: int) -> int:
            return sum(1 for w, _ in adj[v] if not visited[w])

        def dfs() -> bool:
            nonlocal nodes
            nodes += 1
            if nodes > limit:
                raise SearchBudgetError("slice")
            last = path[-1]
            incoming = joins[-1] if joins else None
            if len(path) == m:
                for color in sorted(sets[last] & sets[0]):
                    if color == incoming or color == joins[0]:
                        continue
                    if require_colorful and not (set(joins) | {color}) >= everything:
                        continue
                    joins.append(color)
                    return True
                return False
            options = [(w, color) for w, color in adj[last] if not visited[w] and color != incoming]
            options.sort(key=lambda wc: free_degree(wc[0]))
            for w, color in options:
                visited[w] = True
                path.append(w)
                joins.append(color)
                if dfs():
                    return True
                joins.pop()
                path.pop()
                visited[w] = False
            return False

        try:
            found = dfs()
        except SearchBudgetError:
            found = False
        spent += nodes
        if found:
            cycle = ColoredCycle(tuple(path), tuple(joins))
            if verify_cah(s, cycle, require_colorful).valid:
                return cycle
        if not found and nodes < limit:
            break  # exhausted the whole tree: no cycle exists
    raise SearchBudgetError(f"no alternating hamiltonian cycle found within {budget} nodes")
