"""
Command-line entry point
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from config.settings import APP_NAME, APP_VERSION
from src.cli.commands import COMMANDS, RunContext, run
from src.cli.config_loader import list_presets, load_config
from src.utils.errors import VolterraLabError
from src.utils.log import configure_logging, get_logger

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra-lab",
        description=f"{APP_NAME}: resolvents, Picard ensembles and regularity "
        "measurements for stochastic Volterra equations",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {APP_VERSION}"
    )
    parser.add_argument("subcommand", choices=sorted(COMMANDS), help="stage to run")
    presets = ", ".join(list_presets()) or "none shipped"
    parser.add_argument(
        "--config", required=True, help=f"config file or preset name ({presets})"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="master seed, overrides noise.seed")
    parser.add_argument(
        "--threads", type=int, help="worker cap (default: available cores)"
    )
    parser.add_argument("--output", help="output directory, overrides output.directory")
    parser.add_argument(
        "--no-timestamp", action="store_true", help="omit the timestamp header line"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="warnings and errors only"
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        configure_logging(logging.DEBUG)
    elif args.quiet:
        configure_logging(logging.WARNING)
    else:
        configure_logging(logging.INFO)

    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"noise.seed={args.seed}")
        config = load_config(args.config, overrides)
        if args.output:
            output = replace(config.output, directory=args.output)
            config = replace(config, output=output)
        ctx = RunContext(
            config=config,
            output=config.output.directory,
            threads=args.threads,
            timestamp=config.output.timestamp and not args.no_timestamp,
        )
        logger.info(
            "%s %s on %s -> %s", APP_NAME, args.subcommand, config.source, ctx.output
        )
        return run(args.subcommand, ctx)
    except VolterraLabError as exc:
        logger.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
