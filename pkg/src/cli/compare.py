"""
`compare`: backtest several models on one series and tabulate the results
"""

import argparse
from pathlib import Path

import structlog

from cli.common import (
    OutputSet,
    add_execution_args,
    add_input_arg,
    add_out_arg,
    add_strategy_args,
    execution_config,
    parse_kind,
    require_input,
    strategy_config,
)
from core.enums import ModelKind
from core.exceptions import InvalidArgument
from filters.models import bundled_params, load_model_config
from integrations.market_data import load_csv
from services.comparison import ComparisonService

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("compare", help="write comparison.csv and monthly.csv across models")
    add_input_arg(parser)
    parser.add_argument(
        "--models",
        default=",".join(k.value for k in ModelKind),
        help="comma-separated models run with their bundled parameters (default all four)",
    )
    parser.add_argument(
        "--params",
        type=Path,
        action="append",
        default=None,
        help="model config JSON; repeatable, replaces --models when given",
    )
    add_strategy_args(parser)
    add_execution_args(parser)
    add_out_arg(parser)
    parser.set_defaults(handler=run)


def _models(args: argparse.Namespace) -> list:
    if args.params:
        models = []
        for path in args.params:
            if not path.exists():
                raise InvalidArgument(f"model config {path} does not exist")
            models.append(load_model_config(path))
        return models
    names = [name.strip() for name in args.models.split(",") if name.strip()]
    return [bundled_params(parse_kind(name)) for name in names]


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    bars = load_csv(require_input(args.input))
    service = ComparisonService(strategy_config(args), execution_config(args))
    outcomes = service.run(bars, _models(args))

    service.write(outcomes, outputs.path("comparison.csv"), outputs.path("monthly.csv"))
    logger.info("comparison written", models=[o.label for o in outcomes], bars=len(bars))
    return 0
