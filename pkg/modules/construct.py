# modules/construct.py

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from core.context import get_profile
from core.cycles import ColoredCycle, assemble, find_alternating_cycle, verify_cah
from core.design import (
    Block,
    GroupedDesign,
    GroupType,
    SetSystem,
    bsh_feasible,
    covering_number,
    lenz_feasible,
    verify_covering,
    verify_gdd,
)
from core.errors import ConstructionError, DomainError, NotAvailableError, PreconditionError
from core.log import log, vlog
from models import VerificationReport
from modules import direct
from modules.catalog import Fixture, fixture_key, get_catalog

WeightFn = Mapping[int, int]
IngredientFn = Callable[[GroupType], "CahDesign"]

STS_ORDERS = (3, 7, 9, 13, 15)


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------

@dataclass(frozen=True)
class CahDesign:
    """A covering or {3}-GDD together with a verified alternating hamiltonian cycle.

    Coverings carry singleton groups so both kinds share one GroupedDesign shape.
    """

    design: GroupedDesign
    cycle: ColoredCycle
    colorful: bool
    kind: str = "gdd"  # "covering" | "gdd"

    @property
    def system(self) -> SetSystem:
        return self.design.system

    @property
    def order(self) -> int:
        return self.design.order

    @property
    def blocks(self) -> Tuple[Block, ...]:
        return self.design.blocks

    @property
    def groups(self) -> Tuple[Block, ...]:
        return self.design.groups

    @property
    def group_type(self) -> GroupType:
        return self.design.group_type

    def __len__(self) -> int:
        return len(self.design.blocks)

    def verify(self) -> VerificationReport:
        report = verify_covering(self.system) if self.kind == "covering" else verify_gdd(self.design, {3})
        return report.extend(verify_cah(self.system, self.cycle, self.colorful))

    def cycle_blocks(self) -> List[Block]:
        return [self.blocks[i] for i in self.cycle.blocks]


def _certified(design: GroupedDesign, cycle: ColoredCycle, kind: str, what: str,
               require_colorful: bool = False) -> CahDesign:
    report = verify_covering(design.system) if kind == "covering" else verify_gdd(design, {3})
    cah = verify_cah(design.system, cycle, require_colorful)
    report.extend(cah)
    if not report.valid:
        raise ConstructionError(f"{what} failed verification:\n{report.summary()}", report=report)
    return CahDesign(design, cycle, bool(cah.colorful), kind)


def _singletons(n: int) -> Tuple[Block, ...]:
    return tuple((p,) for p in range(1, n + 1))


def from_fixture(f: Fixture) -> CahDesign:
    if f.cycle == "none":
        raise PreconditionError(f"{f.kind} {f.key[1]} carries no cycle")
    kind = "covering" if f.kind in ("sts", "covering") else "gdd"
    return _certified(f.design, f.certificate(), kind, f"fixture {f.kind} {f.key[1]}", f.cycle == "cah")


def to_fixture(d: CahDesign, kind: str, provenance: str = "constructed", seed: Optional[int] = None) -> Fixture:
    """Blocks in cycle order with pinned joins."""
    grouped = kind.startswith("gdd")
    return Fixture(
        kind=kind,
        order=d.order,
        blocks=tuple(d.cycle_blocks()),
        groups=d.groups if grouped else (),
        joins=d.cycle.joins,
        group_type=str(d.group_type) if grouped else None,
        cycle="cah" if d.colorful else "alternating",
        provenance=provenance,
        seed=seed,
    )


class _Host:
    """Relabelled blocks and cycles accumulated on one point set."""

    def __init__(self, order: int):
        self.order = order
        self.blocks: List[Block] = []
        self.cycles: List[ColoredCycle] = []
        self.seeds: Set[int] = set()

    def add(self, d: CahDesign, points: Mapping[int, int], seeded: bool = False) -> None:
        offset = len(self.blocks)
        self.blocks += [tuple(points[p] for p in b) for b in d.blocks]
        self.cycles.append(d.cycle.relabeled(points).shifted(offset))
        if seeded:
            self.seeds.update(range(offset, len(self.blocks)))

    def finish(self, groups: Sequence[Block], kind: str, what: str, require_colorful: bool) -> CahDesign:
        host = SetSystem(self.order, tuple(self.blocks))
        budget = get_profile().construct.assemble_budget
        cycle = assemble(self.cycles, host, budget=budget, seeds=self.seeds, require_colorful=require_colorful)
        out = _certified(GroupedDesign(host, tuple(groups)), cycle, kind, what, require_colorful)
        vlog("construct", f"{what}: {len(out)} blocks, colorful={out.colorful}")
        return out


def _identity(n: int) -> Dict[int, int]:
    return {p: p for p in range(1, n + 1)}


def _colorful_master(master: CahDesign) -> None:
    if master.kind != "gdd":
        raise PreconditionError("master must be a {3}-GDD")
    if not master.colorful:
        raise PreconditionError(f"master of type {master.group_type} is not colorful; "
                                "fillers could not be spliced into its cycle")


def _y_group(filler: CahDesign, y: int) -> Block:
    if y == 0:
        return ()
    for g in reversed(filler.groups):
        if len(g) == y:
            return g
    raise PreconditionError(f"filler of type {filler.group_type} has no group of size {y}")


def _fill_embedding(filler: CahDesign, group: Sequence[int], adjoined: Sequence[int]) -> Dict[int, int]:
    """Filler points onto sorted(group) followed by the adjoined points."""
    g, y = len(group), len(adjoined)
    if filler.order != g + y:
        raise PreconditionError(f"filler has order {filler.order}, group plus adjoined points need {g + y}")
    if filler.kind == "covering":
        main, extra = list(range(1, g + 1)), list(range(g + 1, g + y + 1))
    else:
        want = GroupType([1] * g + [y])
        if filler.group_type != want:
            raise PreconditionError(f"filler GDD has type {filler.group_type}, expected {want}")
        extra = sorted(_y_group(filler, y))
        main = sorted(set(range(1, filler.order + 1)) - set(extra))
    mapping = dict(zip(main, sorted(group)))
    mapping.update(zip(extra, adjoined))
    return mapping


def _break_embedding(filler: CahDesign, group: Sequence[int], adjoined: Sequence[int], h: int) -> Dict[int, int]:
    """Filler groups of size h onto consecutive h-chunks of sorted(group)."""
    y = len(adjoined)
    want = GroupType([h] * (len(group) // h) + ([y] if y else []))
    if filler.kind != "gdd" or filler.group_type != want:
        raise PreconditionError(f"filler has type {filler.group_type}, expected {want}")
    extra = _y_group(filler, y)
    skip = len(filler.groups) - 1 - filler.groups[::-1].index(extra) if y else -1
    main = [p for i, g in enumerate(filler.groups) if i != skip for p in sorted(g)]
    mapping = dict(zip(main, sorted(group)))
    mapping.update(zip(sorted(extra), adjoined))
    return mapping


# -------------------------------------------------------------------
# Recursive combinators
# -------------------------------------------------------------------

def fill_in_groups(master: CahDesign, fillers: Sequence[Optional[CahDesign]]) -> CahDesign:
    """Fill every group of a colorful {3}-GDD with a covering on that group."""
    _colorful_master(master)
    if len(fillers) != len(master.groups):
        raise PreconditionError(f"{len(fillers)} fillers for {len(master.groups)} groups")
    host = _Host(master.order)
    host.add(master, _identity(master.order))
    for group, filler in zip(master.groups, fillers):
        if filler is None and len(group) == 1:
            continue
        if filler is None or filler.kind != "covering":
            raise PreconditionError(f"group of size {len(group)} needs a covering filler")
        host.add(filler, _fill_embedding(filler, group, ()))
    return host.finish(_singletons(master.order), "covering", f"fill-in of type {master.group_type}", False)


def adjoin_and_fill(master: CahDesign, y: int, last_filler: CahDesign,
                    gdd_fillers: Sequence[CahDesign]) -> CahDesign:
    """Adjoin y points; the last group gets a covering on G+Y, the others GDDs of type 1^g y^1.

    A covering on G_i+Y is also accepted in place of a GDD filler; the
    adjoined pairs are then covered more than once.
    """
    if y < 0:
        raise DomainError(f"cannot adjoin {y} points")
    if y == 0:
        return fill_in_groups(master, list(gdd_fillers) + [last_filler])
    _colorful_master(master)
    groups = master.groups
    if len(gdd_fillers) != len(groups) - 1:
        raise PreconditionError(f"{len(gdd_fillers)} GDD fillers for {len(groups) - 1} groups")
    if last_filler.kind != "covering":
        raise PreconditionError("the last group is filled with a covering")
    n = master.order
    adjoined = tuple(range(n + 1, n + y + 1))
    host = _Host(n + y)
    host.add(master, _identity(n))
    for group, filler in zip(groups[:-1], gdd_fillers):
        host.add(filler, _fill_embedding(filler, group, adjoined))
    host.add(last_filler, _fill_embedding(last_filler, groups[-1], adjoined))
    return host.finish(_singletons(n + y), "covering", f"type {master.group_type} + {y} points", False)


def adjoin_and_break(master: CahDesign, y: int, h: int,
                     fillers: Sequence[Optional[CahDesign]]) -> CahDesign:
    """Adjoin y points and split each group G into h-chunks with a GDD of type h^{|G|/h} y^1."""
    if h < 1 or any(len(g) % h for g in master.groups):
        raise PreconditionError(f"h={h} does not divide every group of type {master.group_type}")
    if y < 0:
        raise DomainError(f"cannot adjoin {y} points")
    _colorful_master(master)
    if len(fillers) != len(master.groups):
        raise PreconditionError(f"{len(fillers)} fillers for {len(master.groups)} groups")
    n = master.order
    adjoined = tuple(range(n + 1, n + y + 1))
    host = _Host(n + y)
    host.add(master, _identity(n))
    groups: List[Block] = []
    for group, filler in zip(master.groups, fillers):
        pts = sorted(group)
        groups += [tuple(pts[i:i + h]) for i in range(0, len(pts), h)]
        if filler is None and y == 0 and len(pts) == h:
            continue
        if filler is None:
            raise PreconditionError(f"group of size {len(pts)} needs a filler")
        host.add(filler, _break_embedding(filler, pts, adjoined, h))
    if y:
        groups.append(adjoined)
    return host.finish(groups, "gdd", f"break of type {master.group_type} into {h}s + {y}", True)


# -------------------------------------------------------------------
# Wilson's fundamental construction
# -------------------------------------------------------------------

def constant_weight(master: GroupedDesign, w: int) -> Dict[int, int]:
    return {p: w for p in master.system.points()}


def wfc(master: GroupedDesign, weights: WeightFn, ingredients: IngredientFn, seeds: Iterable[int] = (),
        require_colorful: bool = True) -> CahDesign:
    """Inflate every point x to weights[x] points and every block to an ingredient GDD.

    Output groups follow master group order; labels are assigned
    consecutively. Ingredient cycles of seeded master blocks are merged
    first.
    """
    missing = [p for p in master.system.points() if p not in weights]
    if missing:
        raise PreconditionError(f"no weight for points {missing[:10]}")
    if any(w < 0 for w in weights.values()):
        raise DomainError("weights must be nonnegative")

    labels: Dict[int, List[int]] = {}
    groups: List[Block] = []
    nxt = 1
    for group in master.groups:
        merged: List[int] = []
        for x in sorted(group):
            labels[x] = list(range(nxt, nxt + weights[x]))
            nxt += weights[x]
            merged += labels[x]
        if merged:
            groups.append(tuple(merged))

    host = _Host(nxt - 1)
    seeded = set(seeds)
    for a, block in enumerate(master.blocks):
        pts = sorted((x for x in block if weights[x] > 0), key=lambda x: (-weights[x], x))
        if len(pts) < 2:
            continue
        want = GroupType(weights[x] for x in pts)
        ing = ingredients(want)
        if ing.kind != "gdd" or ing.group_type != want:
            raise ConstructionError(f"ingredient for block {a} has type {ing.group_type}, expected {want}")
        order = sorted(range(len(ing.groups)), key=lambda i: (-len(ing.groups[i]), i))
        mapping: Dict[int, int] = {}
        for x, gi in zip(pts, order):
            mapping.update(zip(sorted(ing.groups[gi]), labels[x]))
        host.add(ing, mapping, seeded=a in seeded)

    out_type = GroupType(len(g) for g in groups)
    return host.finish(groups, "gdd", f"WFC {master.group_type} -> {out_type}", require_colorful)


# -------------------------------------------------------------------
# Ingredient factory
# -------------------------------------------------------------------

def _search_cycle(design: GroupedDesign, kind: str, what: str) -> CahDesign:
    profile = get_profile().construct
    cycle = find_alternating_cycle(design.system, require_colorful=True, budget=profile.cycle_search_budget,
                                   seed=profile.seed)
    return _certified(design, cycle, kind, what, True)


def master_fixture(kind: str, group_type) -> Fixture:
    """A {4}- or {4,7}-GDD master from the catalog; these carry marks, not cycles."""
    kind, param = fixture_key(kind, group_type)
    if kind == "gdd4":
        sizes = GroupType.parse(param).sizes
        if len(set(sizes)) != 1 or not bsh_feasible(sizes[0], len(sizes)):
            raise DomainError(f"no {{4}}-GDD of type {param} exists")
    return get_catalog().get(kind, param)


def ingredient_factory(kind: str, param) -> CahDesign:
    """Resolve a design request: catalog, then direct constructions, then search."""
    kind, param = fixture_key(kind, param)
    if kind in ("gdd4", "gdd47"):
        master_fixture(kind, param)
        raise PreconditionError(f"{kind} designs serve as WFC masters only; use master_fixture")
    return _resolve(kind, param)


@lru_cache(maxsize=None)
def _resolve(kind: str, param) -> CahDesign:
    catalog = get_catalog()
    try:
        return from_fixture(catalog.get(kind, param))
    except NotAvailableError:
        pass

    if kind == "sts":
        return _search_cycle(GroupedDesign.singletons(direct.sts(param)), "covering", f"STS({param})")
    if kind == "covering":
        return build_covering(param)

    gt = GroupType.parse(param)
    g, t, u = direct.split_type(gt.sizes)
    if g == 6 and u == 0:
        return build_gdd_6t(t)
    if g == 6 and u in (4, 8) and t >= 3:
        return build_gdd_6t_u(t, u)
    if g == 1 and u == 0:
        s = direct.sts(t)
        return _search_cycle(GroupedDesign.singletons(s), "gdd", f"STS({t}) as type {gt}")
    if t == 3 and u == 0:
        return _search_cycle(direct.transversal_gdd(g), "gdd", f"transversal GDD {gt}")
    return _searched_gdd(gt)


def _searched_gdd(gt: GroupType) -> CahDesign:
    profile = get_profile().construct
    log("construct", f"hill-climbing a {{3}}-GDD of type {gt} (seed {profile.seed})")
    design = direct.hill_climb_gdd(gt.sizes, seed=profile.seed, budget=profile.gdd_search_budget)
    out = _search_cycle(design, "gdd", f"searched GDD {gt}")
    get_catalog().store(to_fixture(out, "gdd3", provenance="searched", seed=profile.seed))
    return out


def _ingredient(gt: GroupType) -> CahDesign:
    return ingredient_factory("gdd3", gt)


# -------------------------------------------------------------------
# GDD families 6^t and 6^t u^1
# -------------------------------------------------------------------

def _expect(out: CahDesign, want: GroupType, last: Optional[int] = None) -> CahDesign:
    if out.group_type != want:
        raise ConstructionError(f"construction produced type {out.group_type}, expected {want}")
    if last is not None and len(out.groups[-1]) != last:
        raise ConstructionError(f"the size-{last} group is not listed last")
    return out


def _pbd_master(t: int) -> SetSystem:
    if t in STS_ORDERS:
        try:
            return get_catalog().get("sts", t).system
        except NotAvailableError:
            pass
    return direct.pbd_master(t, seed=get_profile().construct.seed)


@lru_cache(maxsize=None)
def build_gdd_6t(t: int) -> CahDesign:
    if t < 3:
        raise DomainError(f"no {{3}}-GDD of type 6^{t}: needs t >= 3")
    catalog = get_catalog()
    if t in (3, 4, 6):
        master = catalog.get("gdd3", f"2^{t}").design
        out = wfc(master, constant_weight(master, 3), _ingredient)
    elif t in (5, 8):
        f = master_fixture("gdd4", f"3^{t}")
        out = wfc(f.design, constant_weight(f.design, 2), _ingredient, seeds=f.marked("bold"))
    else:
        master = GroupedDesign.singletons(_pbd_master(t))
        out = wfc(master, constant_weight(master, 6), _ingredient)
    return _expect(out, GroupType([6] * t))


@lru_cache(maxsize=None)
def build_gdd_6t_u(t: int, u: int) -> CahDesign:
    if u not in (4, 8):
        raise DomainError(f"u must be 4 or 8, got {u}")
    if t < 3:
        raise DomainError(f"no {{3}}-GDD of type 6^{t} {u}^1: needs t >= 3")
    want = GroupType([6] * t + [u])

    if t in (5, 6, 10):
        big = {5: 6, 6: 6, 10: 12}[t]
        f = master_fixture("gdd47", f"3^{t} {big}^1")
        weights = constant_weight(f.design, 2)
        wide = next(g for g in f.design.groups if len(g) == big)
        # keep u/2 points of the wide group so its weight is exactly u
        for x in sorted(wide)[u // 2:]:
            weights[x] = 0
        seeds = f.marked("bold") if u == 4 else f.marked("bold", "italic")
        return _expect(wfc(f.design, weights, _ingredient, seeds=seeds), want, u)

    if t in (3, 4, 7, 8, 11):
        T = t + 1
        f = master_fixture("gdd4", f"3^{T}")
        weights = constant_weight(f.design, 2)
        weights[3 * T] = 0 if u == 4 else 4
        return _expect(wfc(f.design, weights, _ingredient, seeds=f.marked("bold")), want, u)

    if t in (9, 18):
        master = ingredient_factory("gdd3", f"{t // 3}^3").design
        weight = 6
    elif t in (13, 14):
        master = ingredient_factory("gdd3", GroupType([6, 6, 6, 2 * (t - 9)])).design
        weight = 3
    elif t in (17, 22):
        master = ingredient_factory("gdd3", GroupType([(t - 2) // 5] * 4 + [(t + 8) // 5])).design
        weight = 6
    else:
        return _expect(_lenz_6t_u(t, u), want, u)

    inflated = wfc(master, constant_weight(master, weight), _ingredient)
    fillers = [build_gdd_6t_u(len(g) // 6, u) for g in inflated.groups]
    return _expect(adjoin_and_break(inflated, u, 6, fillers), want, u)


def _lenz_6t_u(t: int, u: int) -> CahDesign:
    v = t + 1
    if not lenz_feasible(v):
        raise NotAvailableError(f"no PBD({v},{{4,5,6,7}}) master for type 6^{t} {u}^1")
    master = GroupedDesign.singletons(direct.lenz_master(v, seed=get_profile().construct.seed))
    weights = constant_weight(master, 6)
    weights[v] = u
    return wfc(master, weights, _ingredient)


# -------------------------------------------------------------------
# Minimum coverings
# -------------------------------------------------------------------

def build_covering(n: int) -> CahDesign:
    """Minimum (n,3,2)-covering with an alternating hamiltonian cycle."""
    if n < 3:
        raise DomainError(f"coverings need n >= 3, got {n}")
    limit = get_profile().construct.validated_max_n
    if n > limit:
        log("construct", f"n={n} lies beyond the validated range (n <= {limit}); building anyway")
    out = _build_covering(n)
    if len(out) != covering_number(n):
        raise ConstructionError(f"covering of order {n} has {len(out)} blocks, minimum is {covering_number(n)}",
                                report=out.verify())
    return out


@lru_cache(maxsize=None)
def _build_covering(n: int) -> CahDesign:
    catalog = get_catalog()
    if n <= 16 or n == 20:
        return from_fixture(catalog.get("sts" if n in STS_ORDERS else "covering", n))

    sts7 = ingredient_factory("sts", 7)
    if n == 17:
        master = from_fixture(catalog.get("gdd3", "5^3"))
        return adjoin_and_fill(master, 2, sts7, [sts7, sts7])

    r = n % 6
    if r == 0:
        master = build_gdd_6t(n // 6)
        return fill_in_groups(master, [_build_covering(len(g)) for g in master.groups])
    if r == 1:
        master = build_gdd_6t((n - 1) // 6)
        return adjoin_and_fill(master, 1, sts7, [sts7] * (len(master.groups) - 1))
    if r == 3:
        master = build_gdd_6t((n - 3) // 6)
        gdd = ingredient_factory("gdd3", "1^6 3^1")
        return adjoin_and_fill(master, 3, ingredient_factory("sts", 9), [gdd] * (len(master.groups) - 1))
    if r in (2, 4):
        u = 8 if r == 2 else 4
        master = build_gdd_6t_u((n - u) // 6, u)
        return fill_in_groups(master, [_build_covering(len(g)) for g in master.groups])
    master = build_gdd_6t_u((n - 5) // 6, 4)
    return adjoin_and_fill(master, 1, _build_covering(5), [sts7] * (len(master.groups) - 1))
