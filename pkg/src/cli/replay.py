"""
`replay`: recompute a recorded trade ledger from its prices
"""

import argparse

import structlog

from cli.common import OutputSet, add_execution_args, add_input_arg, add_out_arg, execution_config, require_input
from services.backtest import load_ledger_csv, replay_ledger, write_trades_csv
from services.reports import compute_report

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("replay", help="recompute profit and PnL for a recorded ledger")
    add_input_arg(parser, help_text="ledger CSV (direction, entry_date, entry_price, exit_date, exit_price)")
    add_execution_args(parser)
    add_out_arg(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    rows = load_ledger_csv(require_input(args.input))
    trades = replay_ledger(rows, execution_config(args))
    write_trades_csv(trades, outputs.path("trades.csv"))
    report = compute_report(trades)
    report.write(outputs.path("report.json"))
    logger.info("ledger replayed", trades=len(trades), final_pnl=trades[-1].cumulative_pnl if trades else 0.0)
    return 0
