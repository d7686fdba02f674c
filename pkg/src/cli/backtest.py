"""
`backtest`: run the strategy with fixed parameters and write the ledger
"""

import argparse

import structlog

from cli.common import (
    OutputSet,
    add_execution_args,
    add_input_arg,
    add_model_args,
    add_out_arg,
    add_strategy_args,
    execution_config,
    require_input,
    resolve_params,
    strategy_config,
)
from integrations.market_data import load_csv
from services.backtest import execute, write_equity_csv, write_trades_csv
from services.reports import compute_report, write_monthly_csv
from services.strategy import run_strategy

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("backtest", help="write trades.csv, equity.csv, report.json and monthly.csv")
    add_input_arg(parser)
    add_model_args(parser)
    add_strategy_args(parser)
    add_execution_args(parser)
    add_out_arg(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    bars = load_csv(require_input(args.input))
    params = resolve_params(args)
    signals = run_strategy(bars, params, strategy_config(args))
    trades, equity = execute(signals, bars, execution_config(args))

    write_trades_csv(trades, outputs.path("trades.csv"))
    write_equity_csv(equity, outputs.path("equity.csv"))
    report = compute_report(trades, equity)
    report.write(outputs.path("report.json"))
    write_monthly_csv(equity, outputs.path("monthly.csv"))

    logger.info(
        "backtest finished",
        model=params.kind.value,
        trades=report.all.num_trades,
        net=round(report.all.net_profit, 1),
    )
    return 0
