# core/design.py

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DomainError
from models import VerificationReport

Block = Tuple[int, ...]


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------

@dataclass(frozen=True)
class SetSystem:
    """Order n plus an ordered block list; points are 1..n."""

    order: int
    blocks: Tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(int(p) for p in b) for b in self.blocks))

    @property
    def block_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def points(self) -> range:
        return range(1, self.order + 1)


class GroupType:
    """Multiset of group sizes, rendered in exponent notation g1^t1 g2^t2 ..."""

    def __init__(self, sizes: Iterable[int]):
        self.counts = Counter(int(s) for s in sizes)

    @classmethod
    def parse(cls, text: str) -> "GroupType":
        sizes: List[int] = []
        for token in text.replace("*", " ").replace(",", " ").split():
            base, _, exp = token.partition("^")
            sizes += [int(base)] * (int(exp) if exp else 1)
        return cls(sizes)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.counts.elements()))

    @property
    def order(self) -> int:
        return sum(self.counts.elements())

    def __str__(self) -> str:
        return " ".join(f"{g}^{t}" for g, t in sorted(self.counts.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupType) and self.counts == other.counts

    def __hash__(self) -> int:
        return hash(self.sizes)

    def __repr__(self) -> str:
        return f"GroupType({self})"


@dataclass(frozen=True)
class GroupedDesign:
    system: SetSystem
    groups: Tuple[Block, ...]
    _group_of: Dict[int, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(p) for p in g)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "_group_of", {p: i for i, g in enumerate(groups) for p in g})

    @classmethod
    def singletons(cls, system: SetSystem) -> "GroupedDesign":
        return cls(system, tuple((p,) for p in system.points()))

    @property
    def order(self) -> int:
        return self.system.order

    @property
    def blocks(self) -> Tuple[Block, ...]:
        return self.system.blocks

    @property
    def group_type(self) -> GroupType:
        return GroupType(len(g) for g in self.groups)

    def group_of(self, point: int) -> Optional[int]:
        return self._group_of.get(point)


# -------------------------------------------------------------------
# Counting
# -------------------------------------------------------------------

def covering_number(n: int) -> int:
    """Fort–Hedlund: C(n,3,2) = ceil((n/3) * ceil((n-1)/2)), integers only."""
    if n < 3:
        raise DomainError(f"covering_number needs n >= 3, got {n}")
    half = n // 2  # == ceil((n-1)/2)
    return (n * half + 2) // 3


def pair_table(s: SetSystem) -> np.ndarray:
    """(n+1)x(n+1) multiplicity table; entry [x, y] with x < y counts blocks holding {x, y}."""
    n = s.order
    table = np.zeros((n + 1, n + 1), dtype=np.int32)
    for b in s.blocks:
        pts = sorted(p for p in set(b) if 1 <= p <= n)
        for x, y in combinations(pts, 2):
            table[x, y] += 1
    return table


def _upper_pairs(mask: np.ndarray) -> List[Tuple[int, int]]:
    n1 = mask.shape[0]
    tri = np.triu(np.ones((n1, n1), dtype=bool), k=1)
    tri[0, :] = False
    return [(int(x), int(y)) for x, y in np.argwhere(mask & tri)]


def _structure(s: SetSystem, report: VerificationReport) -> None:
    for i, b in enumerate(s.blocks):
        bad = [p for p in b if not 1 <= p <= s.order]
        if bad:
            report.add("out-of-range", f"block {i} {b} has points outside 1..{s.order}", [i, *bad])
        if len(set(b)) != len(b):
            report.add("bad-uniformity", f"block {i} {b} repeats a point", [i])


def _duplicates(s: SetSystem, report: VerificationReport) -> None:
    seen: Dict[FrozenSet[int], int] = {}
    for i, b in enumerate(s.block_sets):
        if b in seen:
            report.add("duplicate-block", f"blocks {seen[b]} and {i} are both {sorted(b)}", [seen[b], i])
        else:
            seen[b] = i


# -------------------------------------------------------------------
# Verifiers
# -------------------------------------------------------------------

def verify_k_uniform(s: SetSystem, K: Iterable[int]) -> VerificationReport:
    sizes = set(K)
    report = VerificationReport()
    _structure(s, report)
    for i, b in enumerate(s.blocks):
        if len(set(b)) not in sizes:
            report.add("bad-uniformity", f"block {i} has size {len(set(b))}, allowed {sorted(sizes)}", [i])
    return report


def verify_covering(s: SetSystem) -> VerificationReport:
    report = verify_k_uniform(s, {3})
    table = pair_table(s)
    for x, y in _upper_pairs(table == 0):
        report.add("uncovered-pair", f"pair {{{x},{y}}} lies in no block", [x, y])
    report.minimum = s.order >= 3 and len(s.blocks) == covering_number(s.order)
    return report


def verify_pbd(s: SetSystem, K: Iterable[int]) -> VerificationReport:
    report = verify_k_uniform(s, K)
    _duplicates(s, report)
    table = pair_table(s)
    for x, y in _upper_pairs(table == 0):
        report.add("uncovered-pair", f"pair {{{x},{y}}} lies in no block", [x, y])
    for x, y in _upper_pairs(table > 1):
        report.add("over-covered-pair", f"pair {{{x},{y}}} lies in {table[x, y]} blocks", [x, y])
    return report


def verify_gdd(d: GroupedDesign, K: Iterable[int]) -> VerificationReport:
    s = d.system
    n = s.order
    report = verify_k_uniform(s, K)
    report.group_type = str(d.group_type)

    listed = [p for g in d.groups for p in g]
    if any(len(g) == 0 for g in d.groups):
        report.add("out-of-range", "empty group")
    counts = Counter(listed)
    doubled = sorted(p for p, c in counts.items() if c > 1)
    missing = sorted(set(s.points()) - set(counts))
    stray = sorted(p for p in counts if not 1 <= p <= n)
    if doubled or missing or stray:
        report.add("out-of-range", f"groups do not partition 1..{n}", doubled + missing + stray)

    gid = np.full(n + 1, -1, dtype=np.int64)
    for i, g in enumerate(d.groups):
        for p in g:
            if 1 <= p <= n:
                gid[p] = i
    for i, b in enumerate(s.blocks):
        meet = Counter(int(gid[p]) for p in set(b) if 1 <= p <= n and gid[p] >= 0)
        for g, c in meet.items():
            if c > 1:
                report.add("bad-group-meet", f"block {i} {b} meets group {d.groups[g]} in {c} points", [i, g])

    table = pair_table(s)
    same = (gid[:, None] == gid[None, :]) & (gid[:, None] >= 0)
    for x, y in _upper_pairs((table == 0) & ~same):
        report.add("uncovered-pair", f"cross-group pair {{{x},{y}}} lies in no block", [x, y])
    for x, y in _upper_pairs((table > 1) & ~same):
        report.add("over-covered-pair", f"pair {{{x},{y}}} lies in {table[x, y]} blocks", [x, y])
    return report


# -------------------------------------------------------------------
# Feasibility predicates (advisory)
# -------------------------------------------------------------------

def chr_feasible(g: int, t: int, u: int) -> bool:
    """Existence of a {3}-GDD of type g^t u^1."""
    if g < 0 or t < 0 or u < 0:
        return False
    gt = g * t
    if g > 0 and not (t >= 3 or (t == 2 and u == g) or (t == 1 and u == 0) or t == 0):
        return False
    if not (u <= g * (t - 1) or gt == 0):
        return False
    if not ((g * (t - 1) + u) % 2 == 0 or gt == 0):
        return False
    if not (gt % 2 == 0 or u == 0):
        return False
    return (g * g * (t * (t - 1) // 2) + gt * u) % 3 == 0


def bsh_feasible(g: int, t: int) -> bool:
    """Existence of a {4}-GDD of type g^t."""
    if t < 4 or g < 1 or (g, t) in {(2, 4), (6, 4)}:
        return False
    r = g % 6
    if r in (1, 5):
        return t % 12 in (1, 4)
    if r in (2, 4):
        return t % 3 == 1
    if r == 3:
        return t % 4 in (0, 1)
    return True


LENZ_EXCEPTIONS = frozenset({8, 9, 10, 11, 12, 14, 15, 18, 19, 23})


def gmp_feasible(n: int) -> bool:
    """PBD(n,{3,4,5,6,8}) exists for every n >= 3."""
    return n >= 3


def lenz_feasible(n: int) -> bool:
    """PBD(n,{4,5,6,7}) exists for n >= 4 outside the exception list."""
    return n >= 4 and n not in LENZ_EXCEPTIONS


def sts_feasible(n: int) -> bool:
    return n >= 3 and n % 6 in (1, 3)


def block_points(blocks: Sequence[Block]) -> FrozenSet[int]:
    return frozenset(p for b in blocks for p in b)
