# modules/direct.py

import random
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

from core.design import Block, GroupedDesign, GroupType, SetSystem, chr_feasible, verify_gdd, verify_pbd
from core.errors import ConstructionError, DomainError, NotAvailableError, SearchBudgetError
from core.log import log, vlog
from modules.exact_cover import search_pbd

GMP_SIZES = (3, 4, 5, 6, 8)
LENZ_SIZES = (4, 5, 6, 7)


# -------------------------------------------------------------------
# Steiner triple systems
# -------------------------------------------------------------------

def bose_sts(v: int) -> SetSystem:
    """STS(v), v = 3 mod 6, over Z_n x Z_3 with x o y = (x+y)(n+1)/2 mod n."""
    if v % 6 != 3:
        raise DomainError(f"Bose construction needs v = 3 mod 6, got {v}")
    n = v // 3
    half = (n + 1) // 2

    def label(x: int, i: int) -> int:
        return x + n * (i % 3) + 1

    blocks: List[Block] = [(label(x, 0), label(x, 1), label(x, 2)) for x in range(n)]
    for i in range(3):
        for x, y in combinations(range(n), 2):
            blocks.append((label(x, i), label(y, i), label((x + y) * half % n, i + 1)))
    return SetSystem(v, tuple(blocks))


def skolem_sts(v: int) -> SetSystem:
    """STS(v), v = 1 mod 6, from the half-idempotent quasigroup of order 2n plus a point at infinity."""
    if v % 6 != 1 or v < 7:
        raise DomainError(f"Skolem construction needs v = 1 mod 6, v >= 7, got {v}")
    n = (v - 1) // 6
    order = 2 * n

    def op(x: int, y: int) -> int:
        s = (x + y) % order
        return s // 2 + n * (s % 2)

    def label(x: int, i: int) -> int:
        return x + order * (i % 3) + 1

    blocks: List[Block] = [(label(x, 0), label(x, 1), label(x, 2)) for x in range(n)]
    for x in range(n):
        for i in range(3):
            blocks.append((v, label(x + n, i), label(x, i + 1)))
    for i in range(3):
        for x, y in combinations(range(order), 2):
            blocks.append((label(x, i), label(y, i), label(op(x, y), i + 1)))
    return SetSystem(v, tuple(blocks))


def sts(v: int) -> SetSystem:
    if v == 3:
        return SetSystem(3, ((1, 2, 3),))
    if v % 6 == 3:
        return bose_sts(v)
    if v % 6 == 1:
        return skolem_sts(v)
    raise DomainError(f"no STS({v}): v must be 1 or 3 mod 6")


# -------------------------------------------------------------------
# Finite fields and transversal designs
# -------------------------------------------------------------------

# GF(4) = {0, 1, a, a+1} encoded 0..3; addition is xor
_GF4_MUL = (
    (0, 0, 0, 0),
    (0, 1, 2, 3),
    (0, 2, 3, 1),
    (0, 3, 1, 2),
)


class Field:
    def __init__(self, q: int):
        if q == 4:
            self.add = lambda a, b: a ^ b
            self.mul = lambda a, b: _GF4_MUL[a][b]
        elif q >= 2 and all(q % d for d in range(2, int(q ** 0.5) + 1)):
            self.add = lambda a, b: (a + b) % q
            self.mul = lambda a, b: (a * b) % q
        else:
            raise DomainError(f"GF({q}) is only available for primes and q = 4")
        self.q = q


def transversal_design(k: int, q: int) -> GroupedDesign:
    """TD(k, q) for k <= q + 1: groups are the k coordinates, blocks are lines {(i, a + b x_i)}."""
    if not 2 <= k <= q + 1:
        raise DomainError(f"TD({k},{q}) needs 2 <= k <= q + 1")
    F = Field(q)

    def label(i: int, x: int) -> int:
        return i * q + x + 1

    cols = min(k, q)
    blocks: List[Block] = []
    for a in range(q):
        for b in range(q):
            line = [label(i, F.add(a, F.mul(b, i))) for i in range(cols)]
            if k == q + 1:
                line.append(label(q, b))
            blocks.append(tuple(line))
    groups = tuple(tuple(label(i, x) for x in range(q)) for i in range(k))
    return GroupedDesign(SetSystem(k * q, tuple(blocks)), groups)


def transversal_gdd(g: int) -> GroupedDesign:
    """{3}-GDD of type g^3 from the Latin square x + y mod g."""
    if g < 1:
        raise DomainError("group size must be positive")
    blocks = tuple((x + 1, g + y + 1, 2 * g + (x + y) % g + 1) for x in range(g) for y in range(g))
    groups = tuple(tuple(i * g + x + 1 for x in range(g)) for i in range(3))
    return GroupedDesign(SetSystem(3 * g, blocks), groups)


def truncate(d: GroupedDesign, keep: Sequence[int]) -> GroupedDesign:
    """Keep the first keep[i] points of group i; blocks shrink, points are renumbered."""
    if len(keep) != len(d.groups) or any(not 0 <= r <= len(g) for r, g in zip(keep, d.groups)):
        raise DomainError(f"cannot truncate {d.group_type} to {list(keep)}")
    kept = [p for g, r in zip(d.groups, keep) for p in g[:r]]
    relabel = {p: i + 1 for i, p in enumerate(kept)}
    blocks = []
    for b in d.blocks:
        nb = tuple(relabel[p] for p in b if p in relabel)
        if len(nb) >= 2:
            blocks.append(nb)
    groups = tuple(tuple(relabel[p] for p in g[:r]) for g, r in zip(d.groups, keep) if r)
    return GroupedDesign(SetSystem(len(kept), tuple(blocks)), groups)


def pbd_from_gdd(d: GroupedDesign, adjoin: bool = False) -> SetSystem:
    """Promote the groups to blocks, optionally through one new point."""
    n = d.order + (1 if adjoin else 0)
    extra: List[Block] = []
    for g in d.groups:
        b = g + ((n,) if adjoin else ())
        if len(b) >= 2:
            extra.append(b)
    return SetSystem(n, d.blocks + tuple(extra))


def projective_plane_3() -> SetSystem:
    """PG(2,3) as the translates of the difference set {0,1,3,9} mod 13."""
    return SetSystem(13, tuple(tuple(sorted((d + i) % 13 + 1 for d in (0, 1, 3, 9))) for i in range(13)))


def one_factorization(n: int) -> List[List[Tuple[int, int]]]:
    """Round-robin 1-factorization of K_n on 0..n-1 (n even)."""
    if n % 2 or n < 2:
        raise DomainError("1-factorizations need an even number of points")
    inf, mod = n - 1, n - 1
    factors = []
    for r in range(mod):
        f = [(inf, r)] + [((r + i) % mod, (r - i) % mod) for i in range(1, n // 2)]
        factors.append(f)
    return factors


# -------------------------------------------------------------------
# PBD masters
# -------------------------------------------------------------------

def _checked(s: SetSystem, sizes: Sequence[int], what: str) -> SetSystem:
    report = verify_pbd(s, sizes)
    if not report.valid:
        raise ConstructionError(f"{what} failed verification", report=report)
    return s


def _star_pbd(m: int) -> SetSystem:
    """PBD(2m + 2m - 1, {3, 2m - 1}): one big block, triples from a 1-factorization of K_{2m}."""
    big = 2 * m - 1
    v = big + 2 * m
    blocks: List[Block] = [tuple(range(1, big + 1))]
    for a, factor in enumerate(one_factorization(2 * m), start=1):
        for x, y in factor:
            blocks.append((a, big + 1 + x, big + 1 + y))
    return SetSystem(v, tuple(blocks))


def pbd_master(t: int, sizes: Sequence[int] = GMP_SIZES, seed: int = 0) -> SetSystem:
    """PBD(t, {3,4,5,6,8}) for the 6^t recipes."""
    if t < 3:
        raise DomainError(f"PBD({t}) needs t >= 3")
    K = set(sizes)
    if t in K:
        return SetSystem(t, (tuple(range(1, t + 1)),))
    if t % 6 in (1, 3) and 3 in K:
        return _checked(sts(t), [3], f"STS({t})")
    if t == 10:
        return _checked(pbd_from_gdd(transversal_gdd(3), adjoin=True), K, "PBD(10)")
    if t == 11:
        return _checked(_star_pbd(3), K, "PBD(11)")
    if t == 12:
        return _checked(pbd_from_gdd(transversal_design(4, 3)), K, "PBD(12)")
    if t == 14:
        return _checked(pbd_from_gdd(truncate(transversal_design(5, 4), (4, 4, 4, 1, 1))), K, "PBD(14)")
    if t == 16:
        return _checked(pbd_from_gdd(transversal_design(4, 4)), K, "PBD(16)")
    return _searched_pbd(t, K, seed)


def lenz_master(v: int, seed: int = 0) -> SetSystem:
    """PBD(v, {4,5,6,7}) for the 6^t u^1 recipes."""
    K = set(LENZ_SIZES)
    if v in K:
        return SetSystem(v, (tuple(range(1, v + 1)),))
    if v == 13:
        return _checked(projective_plane_3(), K, "PG(2,3)")
    for q in (4, 5, 7):
        # TD(4,q) or truncated TD(5,q) plus its groups as blocks
        if v == 4 * q and q in K:
            return _checked(pbd_from_gdd(transversal_design(4, q)), K, f"PBD({v})")
        r = v - 4 * q
        if q in K and (r == 1 or (r in K and r <= q)):
            d = truncate(transversal_design(5, q), (q, q, q, q, r))
            return _checked(pbd_from_gdd(d), K, f"PBD({v})")
    return _searched_pbd(v, K, seed)


def _searched_pbd(v: int, K, seed: int) -> SetSystem:
    if v > 16:
        raise NotAvailableError(f"no direct PBD({v},{sorted(K)}) and search is limited to v <= 16")
    log("pbd", f"falling back to exact-cover search for PBD({v},{sorted(K)})")
    blocks = search_pbd(v, K, seed=seed)
    if blocks is None:
        raise NotAvailableError(f"PBD({v},{sorted(K)}) does not exist")
    return _checked(SetSystem(v, tuple(blocks)), K, f"PBD({v})")


# -------------------------------------------------------------------
# Hill-climbing for {3}-GDDs
# -------------------------------------------------------------------

def split_type(sizes: Sequence[int]) -> Tuple[int, int, int]:
    """Read sizes as g^t u^1; u = 0 when all groups are equal."""
    counts: Dict[int, int] = {}
    for s in sizes:
        counts[s] = counts.get(s, 0) + 1
    if len(counts) == 1:
        (g, t), = counts.items()
        return g, t, 0
    if len(counts) == 2:
        singles = sorted((s for s, c in counts.items() if c == 1), reverse=True)
        if singles:
            u = singles[0]
            g = next(s for s in counts if s != u)
            return g, counts[g], u
    raise DomainError(f"group type {GroupType(sizes)} is not of the form g^t u^1")


def hill_climb_gdd(sizes: Sequence[int], seed: int = 0, budget: int = 2_000_000) -> GroupedDesign:
    """Stinson-style hill-climbing for a {3}-GDD with the given group sizes.

    Each step takes a point x with two uncovered cross pairs {x,y}, {x,z};
    the triple {x,y,z} is added and, if {y,z} was already covered, the
    block holding it is dropped.
    """
    g, t, u = split_type(sizes)
    if not chr_feasible(g, t, u):
        raise DomainError(f"no {{3}}-GDD of type {GroupType(sizes)} exists")

    groups: List[Tuple[int, ...]] = []
    gid: Dict[int, int] = {}
    nxt = 1
    for i, size in enumerate(sizes):
        groups.append(tuple(range(nxt, nxt + size)))
        for p in groups[-1]:
            gid[p] = i
        nxt += size
    v = nxt - 1
    points = list(range(1, v + 1))
    cross = sum(1 for x, y in combinations(points, 2) if gid[x] != gid[y])
    target = cross // 3

    rng = random.Random(seed)
    live: Dict[int, set] = {x: {y for y in points if gid[y] != gid[x]} for x in points}
    holder: Dict[Tuple[int, int], frozenset] = {}
    blocks: set = set()

    def key(a: int, b: int) -> Tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def add(block: frozenset) -> None:
        blocks.add(block)
        for a, b in combinations(block, 2):
            holder[key(a, b)] = block
            live[a].discard(b)
            live[b].discard(a)

    def drop(block: frozenset) -> None:
        blocks.discard(block)
        for a, b in combinations(block, 2):
            del holder[key(a, b)]
            live[a].add(b)
            live[b].add(a)

    steps = 0
    while len(blocks) < target:
        steps += 1
        if steps > budget:
            raise SearchBudgetError(f"hill-climbing for type {GroupType(sizes)} ran out after {budget} steps "
                                    f"({len(blocks)}/{target} blocks)")
        x = rng.choice([p for p in points if len(live[p]) >= 2])
        y, z = rng.sample(sorted(live[x]), 2)
        if gid[y] == gid[z]:
            continue
        old = holder.get(key(y, z))
        if old is not None:
            drop(old)
        add(frozenset((x, y, z)))

    vlog("gdd", f"type {GroupType(sizes)}: {target} blocks after {steps} steps (seed {seed})")
    design = GroupedDesign(SetSystem(v, tuple(sorted(tuple(sorted(b)) for b in blocks))), tuple(groups))
    report = verify_gdd(design, {3})
    if not report.valid:
        raise ConstructionError("hill-climbed GDD failed verification", report=report)
    return design

