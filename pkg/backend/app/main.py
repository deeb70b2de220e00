import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from app.cli.deps import load_config
from app.cli.main import commands, run_command
from app.core.config import settings
from app.core.errors import ChannelError

logger = logging.getLogger(__name__)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmcap",
        description="Energy-constrained capacity of Gaussian measurement channels.",
    )
    parser.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    parser.add_argument("--command", required=True, choices=sorted(commands))
    parser.add_argument(
        "--strict",
        action="store_true",
        help="exit with status 4 when the threshold condition fails",
    )
    parser.add_argument("--output", type=Path, help="write results here instead of stdout")
    parser.add_argument("--seed", type=_seed, help="override the configured seed")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s"
    )
    logger.info(f"running {args.command} on {args.config}")
    try:
        config = load_config(args.config, seed=args.seed)
        output = run_command(args.command, config, strict=args.strict)
    except ChannelError as e:
        logger.info(f"{args.command} failed with exit code {e.exit_code}")
        sys.stderr.write(f"error: {e.detail}\n")
        return e.exit_code

    if args.output is None:
        sys.stdout.write(output.text)
    else:
        args.output.write_text(output.text)
    for note in output.notes:
        sys.stderr.write(f"{note}\n")
    logger.info(f"{args.command} finished with exit code {output.exit_code}")
    return output.exit_code


if __name__ == "__main__":
    sys.exit(main())
