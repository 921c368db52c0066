import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from app import __version__
from app.config.settings import settings
from app.exceptions import FedSchedError, InvalidRunConfig
from app.handlers import COMMANDS
from app.services.report_service import FORMATS, report_service

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )


class CliParser(argparse.ArgumentParser):
    """Usage errors surface as InvalidRunConfig so they share the JSON error body."""

    def error(self, message: str):
        raise InvalidRunConfig(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = CliParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default from DEFAULT_SEED)")
    common.add_argument("--format", choices=FORMATS, default="json", help="Output format")
    common.add_argument("--out", type=Path, default=None, help="Write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    parser = CliParser(
        prog=settings.APP_NAME,
        description=settings.APP_DESCRIPTION,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    profile = commands.add_parser("profile", parents=[common], help="Fit per-shard cost models from a trace")
    profile.add_argument("trace", nargs="?", type=Path, help="JSON or JSON Lines profiling trace")
    profile.add_argument("--preset", choices=["sample"], help="Use the bundled sample trace")
    profile.add_argument("--conv", type=float, default=None, help="Target conv parameter count")
    profile.add_argument("--dense", type=float, default=None, help="Target dense parameter count")

    schedule = commands.add_parser("schedule", parents=[common], help="Partition shards across devices")
    schedule.add_argument("scenario", type=Path, help="Instance file (task + devices, or preset)")
    schedule.add_argument("--mode", choices=["iid", "noniid"], default="iid")
    schedule.add_argument(
        "--scheduler",
        choices=["fed_lbap", "analytical", "mincost", "equal_split", "proportional", "random"],
        default=None,
        help="Defaults to fed_lbap for iid and mincost for noniid",
    )
    schedule.add_argument("--alpha", type=float, default=None, help="Accuracy-cost base")
    schedule.add_argument("--alpha-grid", default=None, metavar="LO:HI:STEP", help="Sweep alpha for mincost")
    schedule.add_argument("--verify", action="store_true", help="Cross-check against the exhaustive oracle")

    simulate = commands.add_parser("simulate", parents=[common], help="Run a scheduling campaign")
    simulate.add_argument("campaign", type=Path, help="Campaign file")

    diversity = commands.add_parser("diversity", parents=[common], help="Gradient diversity per user")
    diversity.add_argument("gradients", type=Path, help="Gradients file")

    oracle = commands.add_parser("oracle", parents=[common], help="Exhaustive optimum of a small instance")
    oracle.add_argument("scenario", type=Path, help="Instance file (task + devices, or preset)")
    oracle.add_argument("--mode", choices=["iid", "noniid"], default="iid")
    oracle.add_argument("--alpha", type=float, default=None, help="Accuracy-cost base")

    return parser


def emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text, encoding="utf-8")
    logger.info(f"Report written to {out}")


def emit_error(error: FedSchedError) -> int:
    sys.stdout.write(json.dumps({"error": error.to_dict()}, indent=2, default=str) + "\n")
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InvalidRunConfig as e:
        configure_logging(False)
        logger.error(e.message)
        return emit_error(e)
    configure_logging(args.verbose)

    try:
        payload, rows = COMMANDS[args.command](args)
        emit(report_service.render(payload, rows, args.format), args.out)
        return 0
    except FedSchedError as e:
        logger.error(f"{args.command} failed: {e.message}")
        return emit_error(e)
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        sys.stdout.write(json.dumps({"error": {"code": "internal_error", "message": str(e)}}, indent=2) + "\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
