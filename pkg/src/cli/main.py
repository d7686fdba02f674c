"""
Command-line front end: one subcommand module per command
"""

import argparse
from typing import List, Optional

import structlog

from cli import backtest, compare, optimize, replay, smooth, synthesize
from cli.common import OutputSet, output_dir
from core.exceptions import EmptyLedger, KalmanTrendError
from core.logging import setup_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_EMPTY_LEDGER = 3

COMMANDS = [smooth, backtest, compare, optimize, replay, synthesize]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kalman-trend",
        description="Kalman filter trend following: smoothing, backtests and parameter search",
    )
    parser.add_argument("--log-level", default=None, help="overrides KALMAN_TREND_LOG")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    outputs = OutputSet(output_dir(args))
    try:
        return args.handler(args, outputs)
    except EmptyLedger as e:
        # the (empty) ledger and equity curve stay; the report does not exist
        outputs.discard(keep=("trades.csv", "equity.csv"))
        logger.error("no trades to report", command=args.command, error=str(e))
        return EXIT_EMPTY_LEDGER
    except KalmanTrendError as e:
        outputs.discard()
        logger.error("command failed", command=args.command, error=str(e), error_type=type(e).__name__)
        return EXIT_ERROR
