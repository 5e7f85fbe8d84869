import argparse
import logging
import os
import sys
from typing import List, Optional

from framework.errors import ConfigError
from models import RunConfig
from resources import COMMANDS

LOG_LEVEL_ENV = "DIRAC_LAB_LOG_LEVEL"

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-lab",
        description="Gauge-pulse experiments on the 1+1D Dirac field: hole theory against field theory",
    )
    parser.add_argument("--log-level", default=os.getenv(LOG_LEVEL_ENV, "INFO"),
                        help=f"logging level (env {LOG_LEVEL_ENV}, default INFO)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="YAML run configuration")
        cmd.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                         help="override one config value (repeatable)")
        cmd.add_argument("--output-dir", help="directory for tables and the report")
        cmd.add_argument("--seed", type=int, help="seed for random Fock states")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = RunConfig.load(args.config, args.overrides, args.output_dir, args.seed)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return 1

    logger.info(f"Running {args.command} (config {config.fingerprint()}) into {config.output_dir}")
    try:
        result = COMMANDS[args.command](config)
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.command}: {e}")
        raise

    for line in result.summary:
        print(line)
    for name, path in result.files.items():
        print(f"wrote {name}: {path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
