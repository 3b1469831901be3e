# modules/catalog.py

from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Tuple, Union

from filelock import FileLock
from tqdm import tqdm

from core.context import get_profile
from core.cycles import ColoredCycle, find_alternating_cycle, infer_joins, insert_block, verify_cah
from core.design import (
    Block,
    GroupedDesign,
    GroupType,
    SetSystem,
    covering_number,
    pair_table,
    verify_covering,
    verify_gdd,
    verify_pbd,
)
from core.errors import (
    ConstructionError,
    DomainError,
    FixtureParseError,
    NotAvailableError,
    PreconditionError,
    SearchBudgetError,
    UcoverError,
)
from core.log import log, vlog
from models import VerificationReport
from modules.exact_cover import cover_pairs, pairs_of

KINDS = ("sts", "covering", "gdd3", "gdd4", "gdd47")
CYCLES = ("cah", "alternating", "none")
PROVENANCE = ("bundled", "repaired", "searched", "constructed")
MARKS = ("bold", "italic")

_DEFAULT_SIZES = {"sts": (3,), "covering": (3,), "gdd3": (3,), "gdd4": (4,), "gdd47": (4, 7)}
_STRUCTURAL = {"bad-uniformity", "out-of-range", "duplicate-block"}
_EXCHANGE_POOL = 16

Key = Tuple[str, Union[int, str]]


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------

@dataclass(frozen=True)
class Fixture:
    kind: str
    order: int
    blocks: Tuple[Block, ...]
    marks: Tuple[FrozenSet[str], ...] = ()
    groups: Tuple[Block, ...] = ()
    joins: Tuple[int, ...] = ()
    group_type: Optional[str] = None
    sizes: Tuple[int, ...] = ()
    cycle: str = "cah"
    provenance: str = "bundled"
    seed: Optional[int] = None
    label: Optional[str] = None

    def __post_init__(self):
        if not self.marks:
            object.__setattr__(self, "marks", tuple(frozenset() for _ in self.blocks))

    @property
    def system(self) -> SetSystem:
        return SetSystem(self.order, self.blocks)

    @property
    def design(self) -> GroupedDesign:
        if self.groups:
            return GroupedDesign(self.system, self.groups)
        return GroupedDesign.singletons(self.system)

    @property
    def block_sizes(self) -> Tuple[int, ...]:
        return self.sizes or _DEFAULT_SIZES[self.kind]

    @property
    def key(self) -> Key:
        return fixture_key(self.kind, self.group_type if self.kind.startswith("gdd") else self.order)

    def marked(self, *names: str) -> FrozenSet[int]:
        return frozenset(i for i, m in enumerate(self.marks) if m & set(names))

    def certificate(self, budget: int = 200_000) -> Optional[ColoredCycle]:
        """The block order as a colored cycle; pinned joins win over inference."""
        if self.cycle == "none":
            return None
        order = tuple(range(len(self.blocks)))
        if self.joins:
            return ColoredCycle(order, self.joins)
        return infer_joins(self.system, order, require_colorful=self.cycle == "cah", budget=budget)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.order,
            "type": self.group_type,
            "blocks": len(self.blocks),
            "cycle": self.cycle,
            "provenance": self.provenance,
            "seed": self.seed,
            "label": self.label,
        }


def fixture_key(kind: str, param: Union[int, str, GroupType, None]) -> Key:
    if kind not in KINDS:
        raise DomainError(f"unknown fixture kind {kind!r}; expected one of {', '.join(KINDS)}")
    if kind.startswith("gdd"):
        if param is None:
            raise DomainError(f"{kind} fixtures are keyed by group type")
        gt = param if isinstance(param, GroupType) else GroupType.parse(str(param))
        return kind, str(gt)
    return kind, int(param)


def _slug(key: Key) -> str:
    kind, param = key
    return f"{kind}_{str(param).replace('^', '-').replace(' ', '_')}"


# -------------------------------------------------------------------
# Text format
# -------------------------------------------------------------------

def _ints(tokens: List[str], line_no: int) -> Tuple[int, ...]:
    try:
        return tuple(int(t) for t in tokens)
    except ValueError:
        raise FixtureParseError(line_no, f"expected integers, got {' '.join(tokens)!r}") from None


def load(text: str) -> Fixture:
    header: Optional[Dict[str, str]] = None
    blocks: List[Block] = []
    marks: List[FrozenSet[str]] = []
    groups: List[Block] = []
    joins: List[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            if not line.startswith("fixture"):
                raise FixtureParseError(line_no, "expected a 'fixture kind=... n=...' header")
            header = {}
            for token in line.split()[1:]:
                name, sep, value = token.partition("=")
                if not sep or not value:
                    raise FixtureParseError(line_no, f"malformed header field {token!r}")
                header[name] = value
            continue
        tag, sep, body = line.partition(":")
        if not sep:
            raise FixtureParseError(line_no, f"unrecognised line {line!r}")
        tokens = body.split()
        if tag == "block":
            flags = frozenset(t[1:] for t in tokens if t.startswith("!"))
            unknown = flags - set(MARKS)
            if unknown:
                raise FixtureParseError(line_no, f"unknown marks {sorted(unknown)}")
            pts = _ints([t for t in tokens if not t.startswith("!")], line_no)
            if not pts:
                raise FixtureParseError(line_no, "empty block")
            blocks.append(pts)
            marks.append(flags)
        elif tag == "group":
            groups.append(_ints(tokens, line_no))
        elif tag == "join":
            pts = _ints(tokens, line_no)
            if len(pts) != 1:
                raise FixtureParseError(line_no, "a join line holds exactly one point")
            joins.append(pts[0])
        else:
            raise FixtureParseError(line_no, f"unknown line tag {tag!r}")

    if header is None:
        raise FixtureParseError(1, "empty fixture")
    kind = header.get("kind")
    if kind not in KINDS:
        raise FixtureParseError(1, f"unknown kind {kind!r}")
    if "n" not in header:
        raise FixtureParseError(1, "header is missing n=")
    cycle = header.get("cycle", "none" if kind in ("gdd4", "gdd47") else "cah")
    provenance = header.get("provenance", "bundled")
    if cycle not in CYCLES or provenance not in PROVENANCE:
        raise FixtureParseError(1, f"bad cycle={cycle!r} or provenance={provenance!r}")
    if joins and len(joins) != len(blocks):
        raise FixtureParseError(1, f"{len(joins)} join lines for {len(blocks)} blocks")
    try:
        group_type = str(GroupType.parse(header["type"])) if "type" in header else None
        sizes = tuple(int(k) for k in header["K"].split(",")) if "K" in header else ()
        seed = int(header["seed"]) if "seed" in header else None
        order = int(header["n"])
    except ValueError as e:
        raise FixtureParseError(1, f"bad header value: {e}") from None
    if kind.startswith("gdd") and group_type is None:
        group_type = str(GroupType(len(g) for g in groups)) if groups else None

    return Fixture(kind=kind, order=order, blocks=tuple(blocks), marks=tuple(marks), groups=tuple(groups),
                   joins=tuple(joins), group_type=group_type, sizes=sizes, cycle=cycle,
                   provenance=provenance, seed=seed, label=header.get("label"))


def dump(f: Fixture) -> str:
    head = [f"fixture kind={f.kind} n={f.order}"]
    if f.group_type:
        head.append("type=" + f.group_type.replace(" ", ","))
    if f.sizes:
        head.append("K=" + ",".join(map(str, f.sizes)))
    head.append(f"cycle={f.cycle}")
    head.append(f"provenance={f.provenance}")
    if f.seed is not None:
        head.append(f"seed={f.seed}")
    if f.label:
        head.append(f"label={f.label}")
    lines = [" ".join(head)]
    lines += ["group: " + " ".join(map(str, g)) for g in f.groups]
    for b, m in zip(f.blocks, f.marks):
        flags = "".join(f" !{name}" for name in MARKS if name in m)
        lines.append("block: " + " ".join(map(str, b)) + flags)
    lines += [f"join: {c}" for c in f.joins]
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------
# Check / repair
# -------------------------------------------------------------------

def check(f: Fixture, budget: int = 200_000) -> VerificationReport:
    s = f.system
    if f.kind == "sts":
        report = verify_pbd(s, {3})
        report.minimum = s.order >= 3 and len(s) == covering_number(s.order)
    elif f.kind == "covering":
        report = verify_covering(s)
        want = covering_number(s.order) if s.order >= 3 else 0
        if len(s) != want:
            report.add("wrong-size", f"{len(s)} blocks, a minimum covering of order {s.order} has {want}",
                       [len(s), want])
    else:
        report = verify_gdd(f.design, f.block_sizes)
        if f.group_type and GroupType.parse(f.group_type) != f.design.group_type:
            report.add("wrong-size", f"groups have type {f.design.group_type}, header says {f.group_type}")

    if f.cycle == "none":
        return report
    try:
        cycle = f.certificate(budget)
    except (PreconditionError, SearchBudgetError) as e:
        report.add("not-alternating", f"block order admits no cycle: {e}")
        return report
    return report.extend(verify_cah(s, cycle, f.cycle == "cah"))


def _restitch(kept: SetSystem, full: SetSystem, colorful: bool, seed: int, budget: int) -> ColoredCycle:
    """Splice new blocks into the transcribed order; search from scratch when that fails."""
    base = len(kept.blocks)
    try:
        cycle = infer_joins(kept, range(base), budget=budget)
        for idx in range(base, len(full.blocks)):
            cycle = insert_block(cycle, idx, full)
            if cycle is None:
                break
        if cycle is not None and verify_cah(full, cycle, colorful).valid:
            return cycle
    except (PreconditionError, SearchBudgetError) as e:
        vlog("repair", f"transcribed order unusable ({e}), searching")
    return find_alternating_cycle(full, require_colorful=colorful, budget=budget, seed=seed)


def _exchange(f: Fixture, uncovered: List[Tuple[int, int]], need: int, seed: int, budget: int,
              max_remove: int) -> Tuple[Tuple[int, ...], List[Block]]:
    """Drop r transcribed blocks and cover what they leave bare with need + r triples.

    r grows from 0 (plain completion) to max_remove. Blocks that alone cover
    few pairs, and that touch the uncovered points, are dropped first.
    """
    n = f.order
    table = pair_table(f.system)
    hot = {p for pair in uncovered for p in pair}
    pairs = [pairs_of(b) for b in f.blocks]

    def sole(i: int) -> int:
        return sum(1 for x, y in pairs[i] if table[x, y] == 1)

    ranked = sorted(range(len(f.blocks)), key=lambda i: (sole(i), -len(hot & set(f.blocks[i])), i))
    step = max(1_000, budget // 50)
    for r in range(0, max_remove + 1):
        pool = ranked if r <= 1 else ranked[:_EXCHANGE_POOL]
        for drop in combinations(pool, r):
            freed = Counter(p for i in drop for p in pairs[i])
            bare = [p for p, c in freed.items() if table[p] == c]
            try:
                extra = cover_pairs(n, uncovered + bare, need + r, budget=budget if r == 0 else step, seed=seed)
            except SearchBudgetError:
                continue
            if extra is not None:
                kept = tuple(i for i in range(len(f.blocks)) if i not in drop)
                return kept, extra
        vlog("repair", f"n={n}: no exchange of {r} block(s) works")
    raise ConstructionError(f"{len(uncovered)} uncovered pairs: no exchange of up to {max_remove} blocks "
                            f"completes a covering with {covering_number(n)} blocks")


def repair(f: Fixture, seed: int = 0, budget: int = 200_000, max_remove: int = 3) -> Fixture:
    """Bring a short covering to minimum size and re-stitch its cycle."""
    report = check(f, budget)
    if report.valid:
        return f
    if f.kind != "covering":
        raise PreconditionError(f"only coverings can be repaired, got {f.kind}")
    broken = report.kinds() & _STRUCTURAL
    if broken:
        raise PreconditionError(f"fixture is structurally broken ({', '.join(sorted(broken))}):\n{report.summary()}")
    n = f.order
    need = covering_number(n) - len(f.blocks)
    if need < 0:
        raise PreconditionError(f"covering has {len(f.blocks)} blocks, more than the minimum {covering_number(n)}")

    uncovered = [tuple(v.witness) for v in report.violations if v.kind == "uncovered-pair"]
    kept, extra = _exchange(f, uncovered, need, seed, budget, max_remove)
    kept_system = SetSystem(n, tuple(f.blocks[i] for i in kept))
    full = SetSystem(n, kept_system.blocks + tuple(extra))
    colorful = f.cycle == "cah"
    try:
        cycle = _restitch(kept_system, full, colorful, seed, budget)
    except SearchBudgetError as e:
        raise ConstructionError(f"could not re-stitch a cycle for n={n}: {e}") from e

    marks = tuple(f.marks[i] for i in kept) + tuple(frozenset() for _ in extra)
    fixed = replace(
        f,
        blocks=tuple(full.blocks[i] for i in cycle.blocks),
        marks=tuple(marks[i] for i in cycle.blocks),
        joins=cycle.joins,
        provenance="repaired",
        seed=seed,
    )
    after = check(fixed, budget)
    if not after.valid:
        raise ConstructionError(f"repaired covering n={n} failed verification", report=after)
    dropped = [f.blocks[i] for i in range(len(f.blocks)) if i not in kept]
    log("repair", f"covering n={n}: dropped {dropped}, added {list(extra)}")
    return fixed


# -------------------------------------------------------------------
# Catalog: bundled fixtures + persistent cache
# -------------------------------------------------------------------

@dataclass
class Catalog:
    fixtures_dir: Path
    cache_dir: Path
    repair_seed: int = 0
    repair_budget: int = 200_000
    repair_max_remove: int = 3
    _index: Dict[Key, Path] = field(default=None, repr=False)
    _labels: Dict[str, Path] = field(default=None, repr=False)

    def _scan(self) -> None:
        self._index, self._labels = {}, {}
        for path in sorted(Path(self.fixtures_dir).glob("*.fix")):
            f = load(path.read_text(encoding="utf-8"))
            if f.label:
                self._labels[f.label] = path
            else:
                self._index[f.key] = path
        vlog("catalog", f"indexed {len(self._index)} fixtures from {self.fixtures_dir}")

    @property
    def index(self) -> Dict[Key, Path]:
        if self._index is None:
            self._scan()
        return self._index

    def entries(self) -> List[Tuple[Key, Path]]:
        return sorted(self.index.items(), key=lambda kv: (KINDS.index(kv[0][0]), str(kv[0][1]).zfill(8)))

    def bundled(self, kind: str, param) -> Fixture:
        key = fixture_key(kind, param)
        if key not in self.index:
            raise NotAvailableError(f"{kind} {key[1]} is not bundled")
        return load(self.index[key].read_text(encoding="utf-8"))

    def example(self, label: str) -> Fixture:
        if self._labels is None:
            self._scan()
        if label not in self._labels:
            raise NotAvailableError(f"no bundled example labelled {label!r}")
        return load(self._labels[label].read_text(encoding="utf-8"))

    def cache_path(self, key: Key) -> Path:
        return Path(self.cache_dir) / f"{_slug(key)}.fix"

    def cached(self, kind: str, param) -> Optional[Fixture]:
        path = self.cache_path(fixture_key(kind, param))
        if not path.exists():
            return None
        try:
            return load(path.read_text(encoding="utf-8"))
        except FixtureParseError as e:
            log("catalog", f"ignoring unreadable cache entry {path.name}: {e}")
            return None

    def store(self, f: Fixture) -> Path:
        cache = Path(self.cache_dir)
        cache.mkdir(parents=True, exist_ok=True)
        path = self.cache_path(f.key)
        with FileLock(str(cache / ".lock"), timeout=60):
            tmp = path.with_suffix(".tmp")
            tmp.write_text(dump(f), encoding="utf-8")
            tmp.replace(path)
        vlog("catalog", f"cached {f.kind} {f.key[1]} -> {path}")
        return path

    def get(self, kind: str, param) -> Fixture:
        """Verified fixture from the cache or the bundle, repairing bundled ones once."""
        key = fixture_key(kind, param)
        hit = self.cached(*key)
        if hit is not None:
            if check(hit, self.repair_budget).valid:
                return hit
            log("catalog", f"cache entry {self.cache_path(key).name} no longer verifies, ignoring it")
        if key not in self.index:
            raise NotAvailableError(f"{kind} {key[1]} is neither bundled nor cached")
        f = self.bundled(*key)
        if check(f, self.repair_budget).valid:
            return f
        fixed = repair(f, seed=self.repair_seed, budget=self.repair_budget,
                       max_remove=self.repair_max_remove)
        self.store(fixed)
        return fixed

    def check_all(self, do_repair: bool = True) -> Dict[Key, Tuple[str, VerificationReport]]:
        """Status per bundled fixture: bundled, repaired or quarantined."""
        out: Dict[Key, Tuple[str, VerificationReport]] = {}
        for key, path in tqdm(self.entries(), desc="catalog", disable=None):
            f = load(path.read_text(encoding="utf-8"))
            report = check(f, self.repair_budget)
            if report.valid:
                out[key] = ("bundled", report)
                continue
            if not do_repair:
                out[key] = ("invalid", report)
                continue
            try:
                fixed = repair(f, seed=self.repair_seed, budget=self.repair_budget,
                               max_remove=self.repair_max_remove)
                out[key] = ("repaired", check(fixed, self.repair_budget))
            except UcoverError as e:
                log("catalog", f"{key[0]} {key[1]} quarantined: {e}")
                out[key] = ("quarantined", report)
        return out


@lru_cache(maxsize=1)
def get_catalog() -> Catalog:
    profile = get_profile()
    return Catalog(
        fixtures_dir=profile.fixtures_dir,
        cache_dir=profile.cache_dir,
        repair_seed=profile.catalog.repair_seed,
        repair_budget=profile.catalog.repair_budget,
        repair_max_remove=profile.catalog.repair_max_remove,
    )
