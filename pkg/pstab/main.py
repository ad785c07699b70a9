import argparse
import logging
import sys
from typing import List, Optional

import pydantic

from pstab.config import LOG_FORMAT, LOG_LEVEL, validate_config
from pstab.documents import COMMANDS
from pstab.errors import WorkbenchError
from pstab.reports import EXIT_CODES, exit_code_for_error
from pstab.workbench import Workbench

logger = logging.getLogger("pstab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pstab",
        description="Exact computations for P-stability data on curves and the P1 x E surface.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("params", nargs="*", metavar="key=value", help="command parameters")
    parser.add_argument("--doc", help="input document (JSON, schema_version 1)")
    parser.add_argument("--json", action="store_true", help="write the machine report to stdout")
    return parser


def initialize_system() -> bool:
    """Configure logging and check the environment-derived settings."""
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT, stream=sys.stderr)
    is_valid, problems = validate_config()
    for problem in problems:
        logger.error("Configuration error: %s", problem)
    return is_valid


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not initialize_system():
        return EXIT_CODES["invalid"]

    try:
        report = Workbench().execute(args.command, args.params, args.doc)
    except (WorkbenchError, pydantic.ValidationError) as e:
        code = exit_code_for_error(e)
        print(f"Error: {e}", file=sys.stderr)
        return code

    print(report.to_json() if args.json else report.render())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
