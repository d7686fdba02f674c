"""
`optimize`: parameter search over a JSON search space
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
    require_input,
    strategy_config,
)
from core.enums import Objective
from integrations.market_data import load_csv
from services.optimizer import SearchSpace, optimize, write_trace_csv

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("optimize", help="write result.json and trace.csv")
    add_input_arg(parser)
    parser.add_argument("--space", type=Path, required=True, help="search-space JSON")
    parser.add_argument("--model", default=None, help="must match the search space model when given")
    parser.add_argument("--objective", default=None, choices=[o.value for o in Objective])
    parser.add_argument("--budget", type=int, default=None, help="maximum objective evaluations")
    parser.add_argument("--seed", type=int, default=None)
    add_strategy_args(parser)
    add_execution_args(parser)
    add_out_arg(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    bars = load_csv(require_input(args.input))
    space = SearchSpace.load(require_input(args.space))
    result = optimize(
        bars,
        args.model or space.kind,
        space,
        objective=args.objective,
        budget=args.budget,
        seed=args.seed,
        strategy_cfg=strategy_config(args),
        exec_cfg=execution_config(args),
    )
    result.write(outputs.path("result.json"))
    write_trace_csv(result, outputs.path("trace.csv"))
    logger.info("optimization written", evaluations=result.evaluations, best_objective=result.best_objective)
    return 0
