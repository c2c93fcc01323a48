import argparse
import logging
from typing import Optional, Sequence

from src.core.exceptions import QinrError

from . import census, evaluate, generate, reconstruct, train

logger = logging.getLogger(__name__)

COMMANDS = (train, generate, reconstruct, evaluate, census)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qinr", description="Hybrid quantum-classical autoencoders")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run the subcommand; a QinrError becomes its exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except QinrError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except Exception:
        logger.exception(f"Unexpected failure in {args.command}")
        raise


__all__ = ["build_parser", "run", "COMMANDS"]
