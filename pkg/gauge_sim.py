#!/usr/bin/env python3
"""
gauge_sim - path simulator for gauge mechanics experiments
Main application entry point
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv

from core.errors import ConfigError
from core.models import Estimator
from experiments.catalog import register_experiments
from utils.config_parser import ConfigParser, config_hash
from utils.error_handler import EXIT_OK, handle_error
from utils.runner import apply_cli_overrides, run_experiment

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"
DEFAULT_LOG_FILE = "gauge_sim.log"


def setup_logging(verbose: bool = False) -> None:
    """
    Configure logging to stdout and the log file

    Args:
        verbose: Log at DEBUG instead of INFO
    """
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=logging.DEBUG if verbose else logging.INFO,
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(os.getenv("GAUGE_SIM_LOG_FILE", DEFAULT_LOG_FILE)),
        ],
        force=True,
    )


def environment_overrides() -> Dict[str, str]:
    """Config defaults taken from the process environment."""
    overrides = {}
    workers = os.getenv("GAUGE_SIM_WORKERS")
    if workers:
        overrides["sampler.workers"] = workers
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gauge_sim", description="Gauge mechanics path simulator")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment")
    run.add_argument("experiment", help="experiment name, see list-experiments")
    run.add_argument("--config", required=True, help="configuration document")
    run.add_argument("--out", default=None, help="output directory (default: $GAUGE_SIM_OUTPUT_DIR or results)")
    run.add_argument("--seed", type=int, default=None, help="master seed, replaces seed.master")
    run.add_argument("--estimator", choices=[e.value for e in Estimator], default=None)

    validate = commands.add_parser("validate", help="check a configuration document")
    validate.add_argument("--config", required=True, help="configuration document")

    commands.add_parser("list-experiments", help="show the available experiments")
    return parser


def command_run(args: argparse.Namespace) -> int:
    cfg = ConfigParser(environment_overrides()).parse_file(args.config)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise ConfigError("range", f"seed must be a 64-bit unsigned integer, got {args.seed}", key="seed.master")
    cfg = apply_cli_overrides(cfg, seed=args.seed, estimator=args.estimator)
    out_dir = args.out or os.getenv("GAUGE_SIM_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)
    manifest = run_experiment(args.experiment, cfg, out_dir)
    for file_name in manifest.files:
        print(os.path.join(out_dir, file_name))
    return EXIT_OK


def command_validate(args: argparse.Namespace) -> int:
    cfg = ConfigParser(environment_overrides()).parse_file(args.config)
    print(f"{cfg.experiment}: ok ({config_hash(cfg)[:12]})")
    return EXIT_OK


def command_list_experiments(args: argparse.Namespace) -> int:
    registry = register_experiments()
    for name, experiment in registry.get_registered_experiments().items():
        print(f"{name:16s} {experiment.describe()}")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "validate": command_validate,
    "list-experiments": command_list_experiments,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main function to run gauge_sim

    Args:
        argv: Command line arguments without the program name

    Returns:
        Process exit status: 0 on success, 1 for configuration errors, 2 for run errors
    """
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    try:
        return COMMANDS[args.command](args)
    except Exception as e:
        return handle_error(e)


if __name__ == "__main__":
    sys.exit(main())
