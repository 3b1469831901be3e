# modules/search.py

import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional

from core.context import get_profile
from core.errors import DomainError
from core.log import log, vlog
from models import SearchParams, SearchResult
from modules.radius import IncrementalDefect, RadiusSequence, bound_2c1, defect

_CHECK_EVERY = 1024


# -------------------------------------------------------------------
# Hillclimbing
# -------------------------------------------------------------------

def default_params(**overrides) -> SearchParams:
    p = get_profile().search
    base = dict(seed=p.seed, max_iterations=p.max_iterations, restarts=p.restarts,
                time_limit=p.time_limit, threads=p.threads)
    base.update({k: v for k, v in overrides.items() if v is not None})
    return SearchParams(**base)


def _replica(n: int, m: int, k: int, seed: int, params: SearchParams, stall: int,
             stop: threading.Event, deadline: float) -> SearchResult:
    rng = random.Random(seed)
    started = time.monotonic()
    iterations = restarts = 0
    best_defect, best_seq = None, None
    trajectory: List[int] = []
    monotone = True
    moves = min(3, m)

    while restarts < params.restarts and iterations < params.max_iterations:
        if stop.is_set() or time.monotonic() > deadline:
            break
        state = IncrementalDefect((rng.randint(1, n) for _ in range(m)), n, k)
        floor = current = state.defect
        since = 0
        while state.defect > 0 and since < stall and iterations < params.max_iterations:
            if iterations % _CHECK_EVERY == 0 and (stop.is_set() or time.monotonic() > deadline):
                break
            iterations += 1
            before = state.defect
            changes = {p: rng.randint(1, n) for p in rng.sample(range(m), moves)}
            undo = state.change(changes)
            if state.defect > before:
                state.change(undo)
                if state.defect != before:
                    monotone = False
            # accepted defects never climb within an epoch
            if state.defect > current:
                monotone = False
            current = state.defect
            if state.defect < floor:
                floor, since = state.defect, 0
            else:
                since += 1

        if best_defect is None or state.defect < best_defect:
            best_defect, best_seq = state.defect, list(state.seq)
        if trajectory and best_defect > trajectory[-1]:
            monotone = False
        trajectory.append(best_defect)
        restarts += 1
        if state.defect == 0:
            stop.set()
            break
        vlog("search", f"seed={seed} restart {restarts}: defect {state.defect}")

    return SearchResult(
        success=best_defect == 0,
        n=n, k=k, length=m,
        sequence=best_seq,
        best_defect=best_defect if best_defect is not None else n * (n - 1) // 2,
        iterations=iterations,
        restarts=restarts,
        seed=seed,
        elapsed=time.monotonic() - started,
        monotone_epochs=monotone,
        trajectory=trajectory,
    )


def hillclimb(n: int, m: int, k: int = 2, params: Optional[SearchParams] = None) -> SearchResult:
    """Random restarts of a three-position hillclimb on the defect of [n]^m.

    Each thread runs an independent replica seeded seed + r; the first
    replica to reach defect 0 raises the shared stop flag.
    """
    if n < 2 or m < 1 or k < 1:
        raise DomainError(f"hillclimb needs n >= 2, m >= 1, k >= 1 (got n={n}, m={m}, k={k})")
    params = params or default_params()
    stall = params.stall_limit or get_profile().search.stall_factor * m
    stop = threading.Event()
    deadline = time.monotonic() + params.time_limit
    log("search", f"n={n} m={m} k={k} seed={params.seed} threads={params.threads} stall={stall}")

    seeds = [params.seed + r for r in range(params.threads)]
    if params.threads == 1:
        results = [_replica(n, m, k, seeds[0], params, stall, stop, deadline)]
    else:
        results = []
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            futures = [pool.submit(_replica, n, m, k, s, params, stall, stop, deadline) for s in seeds]
            for future in as_completed(futures):
                results.append(future.result())

    winners = sorted((r for r in results if r.success), key=lambda r: r.seed)
    best = winners[0] if winners else min(results, key=lambda r: (r.best_defect, r.seed))
    if best.success:
        assert defect(RadiusSequence(n=n, seq=best.sequence, k=k)) == 0
        log("search", f"found length {m} sequence (seed {best.seed}, {best.iterations} iterations)")
    else:
        log("search", f"no length {m} sequence; best defect {best.best_defect}")
    return best


# -------------------------------------------------------------------
# Exhaustive f_2 oracle
# -------------------------------------------------------------------

class _F2Search:
    """Depth-first search for a 2-radius sequence of fixed length.

    Symbols are introduced in increasing order and adjacent entries differ;
    a branch dies when the uncovered pairs outnumber what the remaining
    positions can still cover (two per position).
    """

    def __init__(self, n: int, length: int):
        self.n, self.length = n, length
        self.count = [[0] * (n + 1) for _ in range(n + 1)]
        self.uncovered = n * (n - 1) // 2
        self.seq: List[int] = []
        self.nodes = 0

    def _bump(self, a: int, b: int, delta: int) -> None:
        if a == b:
            return
        x, y = (a, b) if a < b else (b, a)
        before = self.count[x][y]
        self.count[x][y] = before + delta
        if before == 0:
            self.uncovered -= 1
        elif before + delta == 0:
            self.uncovered += 1

    def _place(self, v: int, delta: int) -> None:
        for back in self.seq[-2:]:
            self._bump(back, v, delta)

    def run(self) -> Optional[List[int]]:
        return list(self.seq) if self._extend(0) else None

    def _extend(self, used: int) -> bool:
        self.nodes += 1
        left = self.length - len(self.seq)
        if self.uncovered == 0:
            return True
        if left == 0 or self.uncovered > 2 * left or self.n - used > left:
            return False
        last = self.seq[-1] if self.seq else None
        for v in range(1, min(used + 1, self.n) + 1):
            if v == last:
                continue
            self._place(v, 1)
            self.seq.append(v)
            if self._extend(max(used, v)):
                return True
            self.seq.pop()
            self._place(v, -1)
        return False


def exhaustive_f2(n: int, max_len: Optional[int] = None) -> Optional[int]:
    """Exact f_2(n) when it is at most max_len, else None."""
    cap = get_profile().oracle.max_n
    if n > cap:
        raise DomainError(f"exhaustive_f2 is capped at n <= {cap}, got {n}")
    if n < 2:
        raise DomainError(f"exhaustive_f2 needs n >= 2, got {n}")
    if max_len is None:
        max_len = bound_2c1(n) if n >= 3 else 2

    for length in range(n, max_len + 1):
        search = _F2Search(n, length)
        found = search.run()
        vlog("oracle", f"n={n} length={length}: {'found' if found else 'none'} ({search.nodes} nodes)")
        if found:
            log("oracle", f"f_2({n}) = {length}, witness {found}")
            return length
    log("oracle", f"f_2({n}) > {max_len}: unresolved")
    return None
