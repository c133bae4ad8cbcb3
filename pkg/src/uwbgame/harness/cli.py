"""Command line entry point.

``uwbgame run <config>`` executes a scenario and writes its result files;
``uwbgame validate <config>`` only parses and checks it. Exit status is 0
on success, 1 for configuration problems and 2 for failures while running
or writing.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Optional, Sequence

from ..errors import ConfigurationError
from .config import EXPERIMENTS, load_scenario
from .experiments import run_experiment
from .io import write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("uwbgame")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwbgame", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write results")
    run.add_argument("config", help="scenario file (YAML)")
    run.add_argument("--seed", type=_seed, help="override the scenario seed")
    run.add_argument("--trials", type=_positive, help="override the number of trials")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--experiment", choices=EXPERIMENTS, help="override the experiment kind")
    run.add_argument("--workers", type=_positive, help="worker processes (default from config, else 1)")

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("config")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2; those are config errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)

    overrides = {}
    if args.command == "run":
        overrides = {"seed": args.seed, "trials": args.trials, "out": args.out,
                     "experiment": args.experiment, "workers": args.workers}
    try:
        sc = load_scenario(args.config, overrides)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"{args.config}: ok ({sc.experiment.kind}, scenario_hash={sc.scenario_hash})")
        return EXIT_OK

    start = time.perf_counter()
    try:
        result = run_experiment(sc)
        paths = write_outputs(sc, result)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure while running maps to one exit code
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("%s: %d trial(s) in %.2f s", sc.name, sc.trials, time.perf_counter() - start)
    for p in paths.values():
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
