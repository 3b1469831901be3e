# modules/radius.py

import csv
import io
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from core.context import ROOT
from core.design import covering_number
from core.errors import DomainError, PreconditionError
from core.log import vlog
from core.ucycle import ShiftUcycle, blocks_of, from_cah
from models import TableRow, VerificationReport

SEQUENCES_DIR = ROOT / "catalog" / "sequences"

# f_2(n) as closed intervals; a single value when lo == hi
F2_KNOWLEDGE: Dict[int, Tuple[int, int]] = {
    2: (2, 2), 3: (3, 3), 4: (5, 5), 5: (7, 7), 6: (12, 12), 7: (14, 14), 8: (17, 17),
    9: (20, 21), 10: (30, 30), 11: (33, 33), 12: (37, 37), 13: (41, 42), 14: (56, 56),
    15: (60, 60), 16: (65, 65), 17: (70, 73), 18: (90, 90),
}

# published lengths of the number-theoretic construction, n -> (provable, actual)
_JL_THEORY = (346, 410, 479, 552, 629, 711, 798, 888, 983, 1082, 1185, 1292,
              1403, 1518, 1638, 1761, 1888, 2019, 2153, 2292, 2434, 2580, 2730, 2884,
              3041, 3202, 3366, 3535, 3707, 3882, 4061, 4244, 4430, 4620, 4813, 5010)
_JL_ACTUAL = (37, 49, 39, 53, 45, 62, 80, 99, 76, 98, 105, 129,
              158, 185, 150, 179, 170, 202, 256, 290, 217, 254, 297, 336,
              382, 424, 361, 405, 351, 398, 446, 495, 430, 482, 540, 594)
JL_REFERENCE: Dict[int, Tuple[int, int]] = {n: (th, ac) for n, th, ac in zip(range(9, 45), _JL_THEORY, _JL_ACTUAL)}


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSequence:
    n: int
    seq: Tuple[int, ...]
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(int(a) for a in self.seq))
        if self.n < 1 or self.k < 1:
            raise DomainError(f"order and radius must be positive (n={self.n}, k={self.k})")
        if not self.seq:
            raise PreconditionError("a radius sequence needs at least one entry")

    def __len__(self) -> int:
        return len(self.seq)

    def to_dict(self) -> Dict:
        return {"n": self.n, "k": self.k, "length": len(self.seq), "seq": list(self.seq)}


# -------------------------------------------------------------------
# Defect
# -------------------------------------------------------------------

def _covered(s: RadiusSequence) -> np.ndarray:
    a = np.asarray(s.seq, dtype=np.int64)
    a = np.clip(a, 0, s.n + 1)
    table = np.zeros((s.n + 2, s.n + 2), dtype=bool)
    for d in range(1, s.k + 1):
        if d >= len(a):
            break
        table[a[:-d], a[d:]] = True
        table[a[d:], a[:-d]] = True
    return table[1:s.n + 1, 1:s.n + 1]


def missing_pairs(s: RadiusSequence) -> List[Tuple[int, int]]:
    covered = _covered(s)
    upper = np.triu(~covered, k=1)
    return [(int(x) + 1, int(y) + 1) for x, y in np.argwhere(upper)]


def defect(s: RadiusSequence) -> int:
    """Pairs {x,y} of 1..n never within distance k of each other."""
    return int(np.triu(~_covered(s), k=1).sum())


def defect_naive(s: RadiusSequence) -> int:
    seen = set()
    for i, a in enumerate(s.seq):
        for b in s.seq[i + 1:i + 1 + s.k]:
            if a != b:
                seen.add((min(a, b), max(a, b)))
    return sum(1 for p in combinations(range(1, s.n + 1), 2) if p not in seen)


def verify_radius(s: RadiusSequence) -> VerificationReport:
    report = VerificationReport()
    bad = [i for i, a in enumerate(s.seq) if not 1 <= a <= s.n]
    if bad:
        report.add("out-of-range", f"{len(bad)} entries outside 1..{s.n}", bad[:20])
    for x, y in missing_pairs(s):
        report.add("uncovered-pair", f"pair {{{x},{y}}} never within distance {s.k}", [x, y])
    return report


class IncrementalDefect:
    """Windowed pair counts; a change only revisits pairs of positions within distance k of it."""

    def __init__(self, seq: Iterable[int], n: int, k: int = 2):
        self.seq = list(seq)
        self.n, self.k = n, k
        self.count = [[0] * (n + 1) for _ in range(n + 1)]
        # every pair starts uncovered; _bump lowers it as counts leave zero
        self.defect = n * (n - 1) // 2
        m = len(self.seq)
        for i in range(m):
            for j in range(i + 1, min(m, i + k + 1)):
                self._bump(self.seq[i], self.seq[j], 1)

    def _bump(self, a: int, b: int, delta: int) -> None:
        if a == b:
            return
        x, y = (a, b) if a < b else (b, a)
        before = self.count[x][y]
        after = before + delta
        self.count[x][y] = after
        if before == 0 and after > 0:
            self.defect -= 1
        elif before > 0 and after == 0:
            self.defect += 1

    def _touching(self, positions: Iterable[int]) -> List[Tuple[int, int]]:
        m = len(self.seq)
        pairs = set()
        for p in positions:
            for q in range(max(0, p - self.k), min(m, p + self.k + 1)):
                if q != p:
                    pairs.add((min(p, q), max(p, q)))
        return sorted(pairs)

    def change(self, changes: Mapping[int, int]) -> Dict[int, int]:
        """Apply {position: value}; returns the mapping that undoes it."""
        undo = {p: self.seq[p] for p in changes}
        pairs = self._touching(changes)
        for i, j in pairs:
            self._bump(self.seq[i], self.seq[j], -1)
        for p, v in changes.items():
            self.seq[p] = v
        for i, j in pairs:
            self._bump(self.seq[i], self.seq[j], 1)
        return undo


# -------------------------------------------------------------------
# Conversion
# -------------------------------------------------------------------

def from_ucycle(u: ShiftUcycle) -> RadiusSequence:
    """(u_0, ..., u_{2m-1}, u_0) from a 2-shift ucycle of an (n,3,2)-covering."""
    if u.s != 2 or u.k != 3:
        raise PreconditionError(f"from_ucycle needs s=2, k=3, got s={u.s}, k={u.k}")
    blocks_of(u)
    seq = u.seq if u.degenerate else u.seq + (u.seq[0],)
    out = RadiusSequence(n=u.order, seq=seq, k=2)
    gap = defect(out)
    if gap:
        raise PreconditionError(f"ucycle windows miss {gap} pairs of 1..{u.order}")
    return out


def pipeline_sequence(n: int) -> RadiusSequence:
    """build_covering -> from_cah -> from_ucycle, verified at each step."""
    from modules.construct import build_covering

    cah = build_covering(n)
    out = from_ucycle(from_cah(cah.system, cah.cycle))
    vlog("radius", f"n={n}: pipeline sequence of length {len(out)}")
    return out


# -------------------------------------------------------------------
# Bounds
# -------------------------------------------------------------------

def _half_pairs(n: int) -> Fraction:
    return Fraction(n * (n - 1), 4)


def bound_L(n: int) -> int:
    """Lower bound on f_2(n), piecewise in n mod 4."""
    if n < 2:
        raise DomainError(f"bound_L needs n >= 2, got {n}")
    extra = {0: Fraction(n, 4) + 1, 1: Fraction(2), 2: Fraction(3 * n, 4), 3: Fraction(n, 2)}[n % 4]
    value = _half_pairs(n) + extra
    assert value.denominator == 1
    return int(value)


def bound_f1(n: int) -> int:
    if n < 2:
        raise DomainError(f"bound_f1 needs n >= 2, got {n}")
    pairs = n * (n - 1) // 2
    return pairs + 1 if n % 2 else pairs + n // 2


def bound_2c1(n: int) -> int:
    return 2 * covering_number(n) + 1


def bound_gilkerson(n: int) -> Fraction:
    if n < 3:
        raise DomainError(f"bound_gilkerson needs n >= 3, got {n}")
    return Fraction(n * n, 3) + n


def gap(n: int) -> Fraction:
    return bound_gilkerson(n) - bound_2c1(n)


def gap_closed_form(n: int) -> Fraction:
    r = n % 6
    if r in (1, 3):
        return Fraction(4 * n, 3) - 1
    if r in (2, 4):
        return n - Fraction(5, 3)
    if r == 5:
        return Fraction(4 * n - 7, 3)
    return Fraction(n - 1)


def f2_known(n: int) -> Optional[str]:
    if n not in F2_KNOWLEDGE:
        return None
    lo, hi = F2_KNOWLEDGE[n]
    return str(lo) if lo == hi else f"{lo}-{hi}"


# -------------------------------------------------------------------
# Text format: "radius n=<n> k=<k>: a1 a2 ..."
# -------------------------------------------------------------------

_LINE = re.compile(r"^\s*radius\s+n=(\d+)\s+k=(\d+)\s*:\s*(.*)$")


def format_sequence(s: RadiusSequence) -> str:
    return f"radius n={s.n} k={s.k}: " + " ".join(map(str, s.seq))


def parse_sequence(text: str) -> RadiusSequence:
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise PreconditionError(f"not a radius line: {line!r}")
        n, k, body = match.groups()
        try:
            seq = tuple(int(t) for t in body.split())
        except ValueError:
            raise PreconditionError(f"non-integer entry in {body!r}") from None
        return RadiusSequence(n=int(n), seq=seq, k=int(k))
    raise PreconditionError("no radius line found")


@lru_cache(maxsize=1)
def known_sequences(directory: Optional[Path] = None) -> Dict[int, RadiusSequence]:
    """Bundled short 2-radius sequences keyed by order."""
    out: Dict[int, RadiusSequence] = {}
    for path in sorted(Path(directory or SEQUENCES_DIR).glob("*.seq")):
        s = parse_sequence(path.read_text(encoding="utf-8"))
        out[s.n] = s
    return out


# -------------------------------------------------------------------
# Tables
# -------------------------------------------------------------------

def table(start: int, stop: int, run_pipeline: bool = False) -> List[TableRow]:
    if not 3 <= start <= stop:
        raise DomainError(f"table range must satisfy 3 <= from <= to, got {start}..{stop}")
    rows = []
    for n in tqdm(range(start, stop + 1), desc="table", disable=not run_pipeline):
        achieved = None
        if run_pipeline:
            achieved = len(pipeline_sequence(n))
            if achieved != bound_2c1(n):
                raise PreconditionError(f"pipeline length {achieved} at n={n}, expected {bound_2c1(n)}")
        rows.append(TableRow(
            n=n,
            lower_L=bound_L(n),
            len_this=bound_2c1(n),
            gilkerson=str(bound_gilkerson(n)),
            achieved=achieved,
            jl_actual=JL_REFERENCE.get(n, (None, None))[1],
            f2_known=f2_known(n),
        ))
    return rows


_COLUMNS = ("n", "lower_L", "len_this", "gilkerson", "achieved", "jl_actual", "f2_known")


def render_table(rows: List[TableRow], as_csv: bool = False) -> str:
    if as_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for row in rows:
            writer.writerow(["" if getattr(row, c) is None else getattr(row, c) for c in _COLUMNS])
        return buf.getvalue()

    grid = Table(box=None, pad_edge=False)
    for c in _COLUMNS:
        grid.add_column(c, justify="right")
    for row in rows:
        grid.add_row(*("-" if getattr(row, c) is None else str(getattr(row, c)) for c in _COLUMNS))
    console = Console(file=io.StringIO(), width=120, color_system=None, highlight=False)
    console.print(grid)
    return console.file.getvalue()
