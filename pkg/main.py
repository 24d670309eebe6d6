"""
MOVING TEACHER LAB
==================
Online learning of a student perceptron from a moving teacher that is
itself learning a nonmonotonic true teacher: order-parameter theory and
finite-N simulation side by side.

Entry point for the command line:

    python main.py <mode> --config <path> [--out <dir>] [--seed <u64>] [--quiet] [--jobs <n>]
"""

import argparse
import logging
import os
import sys

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from src.core.errors import LabError
from src.core.settings import EXIT_VALIDATION, PROJECT_NAME, VERSION
from src.experiments.config import ExperimentMode, parse_config, with_overrides
from src.experiments.runner import run

logger = logging.getLogger(PROJECT_NAME)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROJECT_NAME, description=__doc__.split("\n\n")[1])
    parser.add_argument("mode", choices=[mode.value for mode in ExperimentMode],
                        help="What to run")
    parser.add_argument("--config", required=True, help="Path to a key = value config document")
    parser.add_argument("--out", default=None, help="Output directory (overrides output_path)")
    parser.add_argument("--seed", type=int, default=None, help="Run seed (overrides seed)")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes for trials and sweeps")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    parser.add_argument("--version", action="version", version=f"{PROJECT_NAME} {VERSION}")
    return parser


def main(argv=None) -> int:
    """Parse arguments, run, and return the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        with open(args.config, encoding="utf-8") as handle:
            config = parse_config(handle.read(), mode=args.mode)
        config = with_overrides(config, seed=args.seed, output_path=args.out, jobs=args.jobs)
    except OSError as exc:
        logger.error(f"cannot read config: {exc}")
        return EXIT_VALIDATION
    except LabError as exc:
        logger.error(str(exc))
        return exc.exit_code

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
