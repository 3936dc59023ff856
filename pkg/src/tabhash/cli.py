"""Command-line interface: ``tabhash <command> [options]``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .arrangements import Arrangement, bad_columns, construct_bad_arrangement, read_arrangement, write_arrangement
from .bench import report_csv, report_markdown, run_benchmark, write_csv
from .config import BenchConfig, Config, ConfigManager
from .derivation import Variant
from .display import (
    format_bad_columns, format_bench_summary, format_config_for_display, format_kmax, format_validation_report,
    format_verdict,
)
from .exceptions import (
    ArrangementFormatError,
    BudgetExceededError,
    ConfigurationError,
    DerivationError,
    DuplicateKeyError,
    KeyFileError,
    TableError,
    TabhashError,
    UnknownFamilyError,
)
from .families import construction_universe, lower_bound_universe, parse_family
from .independence import SearchLedger, find_bad_arrangement, is_independent_set, is_peelable, k_max_search
from .tabulation import Hasher, fill_tables_kwise, fill_tables_random, load_tables, save_tables
from .utils import keys_to_array, read_keys, to_json, to_toml

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_WITNESS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_BAD_INPUT = 4
EXIT_UNKNOWN_FAMILY = 5


def _add_search_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", required=True, help="family id, e.g. curve2_3 or tz4_16")
    parser.add_argument("-n", type=int, required=True, help="universe bound: keys range over [n]^q")
    parser.add_argument("--budget", type=int, help="refuse searches over more subsets than this")
    parser.add_argument("--workers", type=int, help="worker processes for the search")
    parser.add_argument("--ledger", type=Path, help="TOML ledger caching search verdicts")
    parser.add_argument("--no-slope-pruning", action="store_true", help="disable slope pruning for (2,d)-curves")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabhash", description="Tabulation-based hashing and its independence")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--config", type=Path, help="TOML config file (default ~/.tabhash/config.toml)")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("hash", help="hash keys with a randomly filled family member")
    p.add_argument("--family", required=True)
    p.add_argument("--seed", type=int, help="table seed (default from config)")
    p.add_argument("--keys", required=True, help="key file, or - for standard input")
    p.add_argument("--ell", type=int, help="output bits, 1..32")
    p.add_argument("--kwise", type=int, metavar="K", help="fill tables K-wise independently instead of fully random")
    p.add_argument("--save-tables", type=Path, help="write the filled tables in TBH1 format")
    p.add_argument("--load-tables", type=Path, help="use tables from a TBH1 file instead of filling")

    p = commands.add_parser("analyze", help="rank test for a key set")
    p.add_argument("--family", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--keys", help="key file, or - for standard input")
    source.add_argument("--arrangement", help="take the keys from an arrangement file")

    p = commands.add_parser("search", help="exhaustive search for a bad arrangement of size k")
    _add_search_options(p)
    p.add_argument("-k", type=int, required=True, help="arrangement size")
    p.add_argument("--output", default="-", help="witness file (default standard output)")

    p = commands.add_parser("construct", help="write the bad (2,d,2^d)-arrangement")
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--output", default="-", help="arrangement file (default standard output)")

    p = commands.add_parser("verify", help="check an arrangement is bad on all its columns")
    p.add_argument("arrangement", help="arrangement file, or - for standard input")

    p = commands.add_parser("kmax", help="largest k with no bad arrangement in [n]^q")
    _add_search_options(p)
    p.add_argument("--limit", type=int, required=True, help="largest size to search")

    p = commands.add_parser("bench", help="time hash families")
    p.add_argument("--config", dest="bench_config", type=Path, help="bench config file (TOML key = value lines)")
    p.add_argument("--csv", type=Path, help="write the CSV report here instead of standard output")
    p.add_argument("--markdown", type=Path, help="also write a markdown timing table")
    p.add_argument("--parallel", action="store_true", help="run families concurrently")
    p.add_argument("--instrument", action="store_true", help="count table lookups")
    p.add_argument("--report", type=Path, help="write the full report as JSON, or TOML for a .toml suffix")

    p = commands.add_parser("config", help="show and validate the configuration")
    p.add_argument("--init", action="store_true", help="write the default config file if none exists")
    return parser


def configure_logging(verbosity: int, config: Config) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = config.log_level()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _search_options(args, config: Config) -> dict:
    ledger_path = args.ledger or (Path(config.search.ledger_path).expanduser() if config.search.ledger_path else None)
    return {
        "budget": args.budget or config.search.budget,
        "workers": args.workers or config.search.workers,
        "slope_pruning": config.search.slope_pruning and not args.no_slope_pruning,
        "ledger": SearchLedger(ledger_path) if ledger_path else None,
    }


def cmd_hash(args, config: Config) -> int:
    family = parse_family(args.family, ell=args.ell or config.tabulation.ell)
    seed = config.tabulation.seed if args.seed is None else args.seed
    if args.load_tables:
        tables = load_tables(args.load_tables)
    elif args.kwise:
        tables = fill_tables_kwise(seed, family.table_sizes, family.ell, args.kwise)
    else:
        tables = fill_tables_random(seed, family.table_sizes, family.ell)
    if args.save_tables:
        save_tables(tables, args.save_tables)

    q = family.derivation.q
    keys = read_keys(args.keys, q)
    h = Hasher(family.derivation, tables)
    for value in h.hash_many(keys_to_array(keys, q)).tolist():
        print(value)
    return EXIT_OK


def cmd_analyze(args, config: Config) -> int:
    family = parse_family(args.family)
    if args.arrangement:
        keys = list(read_arrangement(args.arrangement).keys)
    else:
        keys = read_keys(args.keys, family.derivation.q)
    verdict = is_independent_set(family.derivation, keys)
    print(format_verdict(verdict, family.family_id))
    print(f"  peelable: {'yes' if is_peelable(family.derivation, keys) else 'no'}")
    return EXIT_OK


def cmd_search(args, config: Config) -> int:
    family = parse_family(args.family)
    spec = family.derivation
    witness = find_bad_arrangement(spec, args.n, args.k, **_search_options(args, config))
    if witness is None:
        print(f"no bad arrangement of size {args.k} for {family.family_id} in [{args.n}]^{spec.q}")
        return EXIT_OK
    comment = f"bad arrangement for {family.family_id}, n={args.n}, k={args.k}"
    if spec.variant is not Variant.CURVE:
        comment += (
            "\nnot a curve arrangement: check it with "
            f"'tabhash analyze --family {family.family_id} --arrangement FILE', not verify"
        )
    write_arrangement(Arrangement(spec.q, spec.d, witness), args.output, comment=comment)
    return EXIT_WITNESS


def cmd_construct(args, config: Config) -> int:
    arr = construct_bad_arrangement(args.d)
    comment = (
        f"bad (2,{arr.d},{arr.k})-arrangement, fits in [{construction_universe(arr.d)}]^2\n"
        f"(2,{arr.d})-curve hashing is not {arr.k}-independent for n >= {lower_bound_universe(arr.d)}"
    )
    write_arrangement(arr, args.output, comment=comment)
    return EXIT_OK


def cmd_verify(args, config: Config) -> int:
    arr = read_arrangement(args.arrangement)
    columns = bad_columns(arr)
    print(format_bad_columns(arr, columns))
    return EXIT_OK if len(columns) == arr.d else EXIT_WITNESS


def cmd_kmax(args, config: Config) -> int:
    family = parse_family(args.family)
    result = k_max_search(family.derivation, args.n, args.limit, **_search_options(args, config))
    print(format_kmax(result, family.family_id))
    return EXIT_OK


def cmd_bench(args, config: Config) -> int:
    cfg = BenchConfig.from_file(args.bench_config) if args.bench_config else config.bench
    if args.parallel:
        cfg.parallel = True
    if args.instrument:
        cfg.instrument = True
    report = run_benchmark(cfg)
    if args.csv:
        write_csv(report, args.csv)
        print(format_bench_summary(report.rows))
    else:
        sys.stdout.write(report_csv(report))
    if args.markdown:
        args.markdown.write_text(report_markdown(report))
    if args.report:
        if args.report.suffix == ".toml":
            to_toml(report, str(args.report), table="bench")
        else:
            to_json(report, str(args.report))
    return EXIT_OK


def cmd_config(args, config: Config) -> int:
    manager = ConfigManager(args.config)
    if args.init:
        if manager.config_path.exists():
            print(f"{manager.config_path} already exists")
        else:
            config = manager.create_default_config()
            print(f"Wrote default configuration to {manager.config_path}")
    print(format_config_for_display(config))
    results = config.get_validation_results()
    print(format_validation_report(results))
    return EXIT_OK if all(results.values()) else EXIT_BAD_INPUT


COMMANDS = {
    "hash": cmd_hash,
    "analyze": cmd_analyze,
    "search": cmd_search,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "kmax": cmd_kmax,
    "bench": cmd_bench,
    "config": cmd_config,
}


def _exit_code(error: TabhashError) -> int:
    if isinstance(error, BudgetExceededError):
        return EXIT_BUDGET
    if isinstance(error, UnknownFamilyError):
        return EXIT_UNKNOWN_FAMILY
    if isinstance(error, (KeyFileError, ArrangementFormatError, ConfigurationError,
                          DerivationError, DuplicateKeyError, TableError)):
        return EXIT_BAD_INPUT
    return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        config = ConfigManager(args.config).load_config()
    except ConfigurationError as e:
        print(f"tabhash: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    configure_logging(args.verbose, config)

    try:
        return COMMANDS[args.command](args, config)
    except TabhashError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"tabhash {args.command}: {e}", file=sys.stderr)
        return _exit_code(e)
    except ValueError as e:
        print(f"tabhash {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
