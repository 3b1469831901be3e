# ucover.py

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

from core.context import CACHE_ENV, get_profile
from core.cycles import verify_cah
from core.design import verify_covering, verify_gdd, verify_pbd
from core.errors import UcoverError
from core.log import log, set_verbose
from core.ucycle import format_ucycle, from_cah, parse_ucycle, verify_shift_ucycle
from models import VerificationReport

VERIFY_KINDS = ("covering", "pbd", "gdd", "ucycle", "radius")
EMIT = ("covering", "ucycle", "radius")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        log("error", message)
        raise SystemExit(2)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"seeds are non-negative, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ucover", description="Minimum (n,3,2)-coverings, 2-shift ucycles and 2-radius sequences.")
    parser.add_argument("--verbose", action="store_true", help="stage-level diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build a minimum covering and its ucycle / radius sequence "
                                  "(the seed is recorded in the output)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit", choices=EMIT, default="covering")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="verify a design, ucycle or radius sequence file")
    p.add_argument("--kind", choices=VERIFY_KINDS, required=True)
    p.add_argument("--file", type=Path, required=True)
    p.add_argument("--design", type=Path, help="covering fixture the ucycle should enumerate")

    p = sub.add_parser("search", help="hillclimb for a k-radius sequence of fixed length; "
                                   "the seed used is printed as a '# seed=' line")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--len", dest="length", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--stall", type=_positive)
    p.add_argument("--restarts", type=_positive)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--threads", type=_positive)

    p = sub.add_parser("oracle", help="exhaustive oracles")
    p.add_argument("which", choices=("f2",))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-len", type=_positive)

    p = sub.add_parser("table", help="bounds on f_2(n) per order")
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--run-pipeline", action="store_true")
    p.add_argument("--csv", action="store_true")

    p = sub.add_parser("catalog", help="bundled fixtures")
    p.add_argument("action", choices=("list", "check", "repair"))
    p.add_argument("--cache", type=Path, help=f"cache directory (overrides {CACHE_ENV})")
    p.add_argument("--out", type=Path, help="write repaired fixtures here")
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "build" and args.n < 3:
        parser.error(f"build needs --n >= 3, got {args.n}")
    if args.command == "search" and args.n < 2:
        parser.error(f"search needs --n >= 2, got {args.n}")
    if args.command == "search" and args.time_limit is not None and args.time_limit <= 0:
        parser.error("--time-limit must be positive")
    if args.command == "oracle" and args.n < 2:
        parser.error(f"oracle needs --n >= 2, got {args.n}")
    if args.command == "table" and not 3 <= args.start <= args.stop:
        parser.error(f"table needs 3 <= --from <= --to, got {args.start}..{args.stop}")
    if args.command == "verify" and args.kind == "ucycle" and args.design is None:
        parser.error("verify --kind ucycle needs --design")
    if args.command == "catalog" and args.out is not None and args.action != "repair":
        parser.error("--out only applies to catalog repair")


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    log("cli", f"wrote {out}")


def _report(report: VerificationReport) -> int:
    print(report.summary())
    if report.minimum is not None:
        print(f"minimum: {'yes' if report.minimum else 'no'}")
    if report.group_type is not None:
        print(f"group type: {report.group_type}")
    if report.colorful is not None:
        print(f"colorful: {'yes' if report.colorful else 'no'}")
    return 0 if report.valid else 1


# -------------------------------------------------------------------
# Subcommands
# -------------------------------------------------------------------

def cmd_build(args) -> int:
    from modules.catalog import dump, get_catalog
    from modules.construct import build_covering, to_fixture
    from modules.radius import format_sequence, from_ucycle, verify_radius

    profile = get_profile()
    seed = profile.construct.seed if args.seed is None else args.seed
    profile.construct.seed = seed
    if profile.catalog.repair_seed != seed:
        profile.catalog.repair_seed = seed
        get_catalog.cache_clear()
    log("build", f"n={args.n} emit={args.emit} seed={seed}")

    cah = build_covering(args.n)
    if args.emit == "covering":
        report = cah.verify()
        text = dump(to_fixture(cah, "covering", seed=seed))
    else:
        u = from_cah(cah.system, cah.cycle)
        report = verify_shift_ucycle(u, cah.system)
        text = format_ucycle(u)
        if args.emit == "radius":
            s = from_ucycle(u)
            report = verify_radius(s)
            text = format_sequence(s)
        text = f"# seed={seed}\n" + text
    if not report.valid:
        log("error", f"refusing to write an unverified {args.emit}:\n{report.summary()}")
        return 1
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    from modules.catalog import load
    from modules.radius import parse_sequence, verify_radius

    text = args.file.read_text(encoding="utf-8")
    if args.kind == "radius":
        return _report(verify_radius(parse_sequence(text)))
    if args.kind == "ucycle":
        design = load(args.design.read_text(encoding="utf-8"))
        return _report(verify_shift_ucycle(parse_ucycle(text), design.system))

    f = load(text)
    if args.kind == "pbd":
        return _report(verify_pbd(f.system, f.block_sizes))
    report = verify_covering(f.system) if args.kind == "covering" else verify_gdd(f.design, f.block_sizes)
    if f.cycle != "none":
        report.extend(verify_cah(f.system, f.certificate(), f.cycle == "cah"))
    return _report(report)


def cmd_search(args) -> int:
    from modules.radius import RadiusSequence, format_sequence
    from modules.search import default_params, hillclimb

    params = default_params(seed=args.seed, stall_limit=args.stall, restarts=args.restarts,
                            time_limit=args.time_limit, threads=args.threads)
    log("search", f"seed={params.seed}")
    result = hillclimb(args.n, args.length, args.k, params)
    print(f"# seed={result.seed}")
    if result.success:
        print(format_sequence(RadiusSequence(n=args.n, seq=result.sequence, k=args.k)))
        return 0
    print(f"no sequence of length {args.length} found: best defect {result.best_defect} "
          f"after {result.restarts} restarts")
    return 1


def cmd_oracle(args) -> int:
    from modules.search import exhaustive_f2

    value = exhaustive_f2(args.n, args.max_len)
    if value is None:
        print(f"f2({args.n}) unresolved (> {args.max_len})")
        return 1
    print(f"f2({args.n}) = {value}")
    return 0


def cmd_table(args) -> int:
    from modules.radius import render_table, table

    rows = table(args.start, args.stop, run_pipeline=args.run_pipeline)
    sys.stdout.write(render_table(rows, as_csv=args.csv))
    return 0


def cmd_catalog(args) -> int:
    from modules.catalog import check, dump, get_catalog, load

    catalog = get_catalog()
    if args.action == "list":
        for (kind, param), path in catalog.entries():
            f = load(path.read_text(encoding="utf-8"))
            print(f"{kind:<9} {str(param):<12} blocks={len(f.blocks):<4} cycle={f.cycle:<11} {path.name}")
        return 0

    if args.action == "check":
        status = catalog.check_all(do_repair=True)
        for (kind, param), (state, report) in status.items():
            print(f"{kind:<9} {str(param):<12} {state}")
        return 0 if all(s in ("bundled", "repaired") for s, _ in status.values()) else 1

    failed = 0
    for (kind, param), path in catalog.entries():
        bundled = load(path.read_text(encoding="utf-8"))
        if check(bundled, catalog.repair_budget).valid:
            continue
        try:
            fixed = catalog.get(kind, param)
        except UcoverError as e:
            log("catalog", f"{kind} {param}: {e}")
            failed += 1
            continue
        print(f"{kind:<9} {str(param):<12} repaired (seed {fixed.seed})")
        if args.out is not None:
            _emit(dump(fixed), args.out / path.name)
    return 1 if failed else 0


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "search": cmd_search,
    "oracle": cmd_oracle,
    "table": cmd_table,
    "catalog": cmd_catalog,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as e:
        return int(e.code or 0)

    set_verbose(args.verbose or get_profile().verbose_logging)
    if getattr(args, "cache", None) is not None:
        os.environ[CACHE_ENV] = str(args.cache)
        from modules.catalog import get_catalog
        get_catalog.cache_clear()

    try:
        return COMMANDS[args.command](args)
    except (UcoverError, OSError) as e:
        log("error", str(e))
        return 1
    except Exception as e:
        log("error", f"internal error in {args.command}: {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
