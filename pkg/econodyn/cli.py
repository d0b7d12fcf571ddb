"""
Command-line interface for econodyn batch scenarios.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import runner
from .errors import ConfigError, ConfigNotFoundError, EconodynError
from .models import to_jsonable

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_NOT_FOUND = 3
EXIT_CONFIG = 4


def _compact_arg(parser):
    """Add --compact flag to a parser."""
    parser.add_argument(
        "--compact",
        action="store_true",
        help="Print compact JSON output.",
    )


def _overrides(parser):
    parser.add_argument(
        "--grid",
        type=int,
        default=None,
        help="Override the segment count (per unit interval for balance systems).",
    )
    parser.add_argument(
        "--out",
        default=None,
        help="Override the output directory.",
    )


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="econodyn",
        description="Integral-equation macroeconomic dynamics: batch scenario runner",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Log solver progress to stderr.",
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Log per-iteration residuals to stderr.",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser(
        "run", help="Run scenario files and write trajectory.csv and report.json."
    )
    run_parser.add_argument("configs", nargs="+", help="Scenario JSON file(s).")
    _overrides(run_parser)
    run_parser.add_argument(
        "--variants",
        default=None,
        help="Variants JSON file for balance-sweep scenarios.",
    )
    run_parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="Number of scenarios to run concurrently (default: 1).",
    )
    _compact_arg(run_parser)

    diagnose_parser = subparsers.add_parser(
        "diagnose", help="Health checks on the coefficient matrix of a balance scenario."
    )
    diagnose_parser.add_argument("config", help="Scenario JSON file.")
    _overrides(diagnose_parser)
    _compact_arg(diagnose_parser)

    return parser


def _resolve_log_level(verbose, debug):
    if debug:
        return logging.DEBUG
    if verbose:
        return logging.INFO
    name = os.environ.get("ECONODYN_LOG_LEVEL", "").strip().upper()
    level = logging.getLevelName(name) if name else logging.WARNING
    return level if isinstance(level, int) else logging.WARNING


def _configure_logging(verbose, debug):
    logging.basicConfig(
        level=_resolve_log_level(verbose, debug),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _print_json(payload, compact=False):
    data = to_jsonable(getattr(payload, "raw", payload))
    if compact:
        print(json.dumps(data, ensure_ascii=False, separators=(",", ":")))
        return
    print(json.dumps(data, ensure_ascii=False, indent=2))


def _error_payload(exc, source=None):
    err = exc.to_dict()
    if source is not None:
        err["config"] = str(source)
    return err


def _exit_code(exc):
    if isinstance(exc, ConfigNotFoundError):
        return EXIT_NOT_FOUND
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    return EXIT_SOLVER


def _run_one(config, args, out):
    try:
        result = runner.run_scenario(
            config, grid=args.grid, out=out, variants_path=args.variants
        )
    except EconodynError as exc:
        return _exit_code(exc), _error_payload(exc, config)
    return EXIT_OK, {
        "config": str(config),
        "kind": result.scenario.kind,
        "status": "ok",
        "trajectory": str(result.trajectory_path),
        "report": str(result.report_path),
        "warnings": result.warnings,
    }


def _command_run(args, parser):
    if args.jobs < 1:
        parser.error("--jobs must be a positive integer.")
    if args.grid is not None and args.grid < 1:
        parser.error("--grid must be a positive integer.")
    configs = args.configs

    def out_for(config):
        if args.out is None or len(configs) == 1:
            return args.out
        return str(Path(args.out) / Path(config).stem)

    if args.jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(lambda c: _run_one(c, args, out_for(c)), configs))
    else:
        outcomes = [_run_one(config, args, out_for(config)) for config in configs]

    status = max(code for code, _ in outcomes)
    for code, payload in outcomes:
        if code != EXIT_OK:
            print(json.dumps(payload, ensure_ascii=False, indent=2), file=sys.stderr)
    summaries = [payload for code, payload in outcomes if code == EXIT_OK]
    if summaries:
        _print_json(summaries[0] if len(configs) == 1 else summaries, compact=args.compact)
    return status


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.debug)

    if args.command == "run":
        return _command_run(args, parser)

    if args.grid is not None and args.grid < 1:
        parser.error("--grid must be a positive integer.")
    try:
        health = runner.diagnose(args.config, grid=args.grid, out=args.out)
    except EconodynError as exc:
        payload = _error_payload(exc, args.config)
        print(json.dumps(payload, ensure_ascii=False, indent=2), file=sys.stderr)
        return _exit_code(exc)

    _print_json(health.to_dict(), compact=args.compact)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
