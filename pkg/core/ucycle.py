# core/ucycle.py

import re
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

from core.cycles import ColoredCycle, verify_cah
from core.design import SetSystem
from core.errors import MalformedWindowError, PreconditionError
from models import VerificationReport


@dataclass(frozen=True)
class ShiftUcycle:
    seq: Tuple[int, ...]
    s: int
    k: int
    order: Optional[int] = None
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(int(p) for p in self.seq))
        if self.s < 1 or self.k < 1:
            raise PreconditionError("shift and rank must be positive")
        if not self.degenerate and len(self.seq) % self.s:
            raise PreconditionError(f"length {len(self.seq)} is not a multiple of s={self.s}")
        if self.order is None:
            object.__setattr__(self, "order", max(self.seq, default=0))

    @property
    def m(self) -> int:
        return 1 if self.degenerate else len(self.seq) // self.s


def blocks_of(u: ShiftUcycle) -> List[Tuple[int, ...]]:
    """Windows B_i = (u_{s*i}, ..., u_{s*i+k-1}), indices mod s*m."""
    if u.degenerate:
        if len(set(u.seq)) != len(u.seq):
            raise MalformedWindowError(0, u.seq)
        return [u.seq]
    L = len(u.seq)
    windows = []
    for i in range(u.m):
        w = tuple(u.seq[(u.s * i + r) % L] for r in range(u.k))
        if len(set(w)) != u.k:
            raise MalformedWindowError(i, w)
        windows.append(w)
    return windows


def verify_shift_ucycle(u: ShiftUcycle, s: SetSystem) -> VerificationReport:
    report = VerificationReport()
    try:
        windows = blocks_of(u)
    except MalformedWindowError as e:
        report.add("malformed-window", str(e), [e.index])
        return report

    got = Counter(frozenset(w) for w in windows)
    want = Counter(s.block_sets)
    for block, c in sorted(got.items(), key=lambda kv: sorted(kv[0])):
        if c > 1:
            report.add("duplicate-block", f"window {sorted(block)} occurs {c} times", sorted(block))
    extra = sorted(sorted(b) for b in got if b not in want)
    missing = sorted(sorted(b) for b in want if b not in got)
    if extra:
        report.add("wrong-size", f"{len(extra)} windows are not blocks of the system", extra)
    if missing:
        report.add("wrong-size", f"{len(missing)} blocks never appear as a window", missing)
    for block, c in want.items():
        if c > 1:
            report.add("duplicate-block", f"system repeats block {sorted(block)}", sorted(block))
    return report


def from_cah(s: SetSystem, c: ColoredCycle) -> ShiftUcycle:
    """Order each B_i as (c_{i-1}, interior..., c_i) and emit all but the last point."""
    report = verify_cah(s, c, False)
    if not report.valid:
        raise PreconditionError(f"cycle is not alternating hamiltonian:\n{report.summary()}")
    sizes = {len(b) for b in s.blocks}
    if len(sizes) != 1:
        raise PreconditionError(f"system is not uniform: block sizes {sorted(sizes)}")
    k = sizes.pop()

    if c.degenerate:
        return ShiftUcycle(tuple(sorted(s.blocks[c.blocks[0]])), s=k - 1, k=k,
                           order=s.order, degenerate=True)
    if k < 3:
        raise PreconditionError("shift ucycles from cycles need k >= 3")

    sets = s.block_sets
    m = len(c)
    seq: List[int] = []
    for i in range(m):
        first, last = c.joins[i - 1], c.joins[i]
        interior = sorted(sets[c.blocks[i]] - {first, last})
        seq += [first, *interior]
    return ShiftUcycle(tuple(seq), s=k - 1, k=k, order=s.order)


def to_cah(u: ShiftUcycle, s: SetSystem) -> ColoredCycle:
    report = verify_shift_ucycle(u, s)
    if not report.valid:
        raise PreconditionError(f"ucycle does not verify against the system:\n{report.summary()}")
    if u.s != u.k - 1:
        raise PreconditionError(f"to_cah needs s = k - 1, got s={u.s}, k={u.k}")
    index = {b: i for i, b in enumerate(s.block_sets)}
    windows = blocks_of(u)
    order = tuple(index[frozenset(w)] for w in windows)
    if u.degenerate:
        return ColoredCycle(order, ())
    L = len(u.seq)
    joins = tuple(u.seq[((i + 1) * u.s) % L] for i in range(u.m))
    return ColoredCycle(order, joins)


# -------------------------------------------------------------------
# Text format: "ucycle s=<s> k=<k> n=<n>: u0 u1 ..."
# -------------------------------------------------------------------

_LINE = re.compile(r"^\s*ucycle\s+s=(\d+)\s+k=(\d+)\s+n=(\d+)(\s+degenerate)?\s*:\s*(.*)$")


def format_ucycle(u: ShiftUcycle) -> str:
    flag = " degenerate" if u.degenerate else ""
    return f"ucycle s={u.s} k={u.k} n={u.order}{flag}: " + " ".join(map(str, u.seq))


def parse_ucycle(text: str) -> ShiftUcycle:
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise PreconditionError(f"not a ucycle line: {line!r}")
        s, k, n, degenerate, body = match.groups()
        return ShiftUcycle(tuple(int(t) for t in body.split()), s=int(s), k=int(k), order=int(n),
                           degenerate=bool(degenerate))
    raise PreconditionError("no ucycle line found")
