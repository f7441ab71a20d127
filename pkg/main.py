import argparse
import json
import logging
import os
import sys

from dotenv import load_dotenv

from log.setupLogger import setup_logging
from rlsForget.errors import ConfigError
from rlsForget.scenarios.catalog import list_scenarios, load_scenario
from rlsForget.scenarios.config import with_overrides
from rlsForget.scenarios.runner import default_out_dir, run_many
from rlsForget.scenarios.verify import SUITE_NAMES, verify

# Get logger for this module
logger = logging.getLogger("rls_experiments")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py",
                                     description="Recursive least squares with forgetting: scenarios and checks.")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run scenarios and write CSV traces")
    run_parser.add_argument("--scenario", action="append", required=True,
                            help="builtin name or path to a JSON scenario file (repeatable)")
    run_parser.add_argument("--steps", type=int, help="override the number of steps")
    run_parser.add_argument("--seed", type=int, help="override the seed")
    run_parser.add_argument("--out", help="output directory (default RLS_OUT_DIR or ./output)")
    run_parser.add_argument("--plots", action="store_true", help="render SVG plots next to each CSV")
    run_parser.add_argument("--workers", type=int, default=int(os.getenv("RLS_WORKERS", "1")),
                            help="scenarios run in parallel (default RLS_WORKERS or 1)")

    verify_parser = commands.add_parser("verify", help="run the self-verification suites")
    verify_parser.add_argument("--suite", choices=SUITE_NAMES, default="all")
    verify_parser.add_argument("--corrupt-lambda", type=float, default=None,
                               help="replay the bounds scenarios with this lambda (negative control)")

    list_parser = commands.add_parser("list", help="list the builtin scenarios")
    list_parser.add_argument("--machine", action="store_true", help="print the catalog as JSON")
    return parser


def cmd_run(args) -> int:
    scenarios = [with_overrides(load_scenario(s), steps=args.steps, seed=args.seed, plots=args.plots or None)
                 for s in args.scenario]
    out_dir = args.out or default_out_dir()
    results = run_many(scenarios, out_dir, workers=args.workers)

    status = EXIT_OK
    for result in results:
        print(f"{result.scenario.name}: {result.completed_steps}/{result.scenario.steps} steps -> {result.csv_path}")
        for path in result.plot_paths:
            print(f"  {path}")
        if result.tripped:
            print(f"  {result.guard.footer()}")
            status = EXIT_GUARD
    return status


def cmd_verify(args) -> int:
    report = verify(args.suite, corrupt_lambda=args.corrupt_lambda)
    print(report.render())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_list(args) -> int:
    catalog = list_scenarios()
    if args.machine:
        print(json.dumps(catalog, indent=2))
        return EXIT_OK
    for entry in catalog:
        print(f"{entry['name']:<24} {entry['strategy']:<16} lambda={entry['lambda']:<7g} steps={entry['steps']:<6} "
              f"{entry['description']}")
        print(f"{'':<24} demonstrates: {entry['demonstrates']}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "list": cmd_list}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Invalid configuration ({len(e.errors)} problem(s))")
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        logger.info("Shutdown requested by user")
        return EXIT_OK
    except Exception as e:
        logger.critical(f"Critical error in {args.command}")
        logger.exception(e)
        return EXIT_FAILED


if __name__ == "__main__":
    load_dotenv()
    setup_logging(modules_with_files=["rls_experiments", "rlsForget"])

    sys.exit(main())
