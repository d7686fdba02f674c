"""
Flags and helpers shared by the subcommands
"""

import argparse
from pathlib import Path
from typing import List, Optional

import structlog

from core.config import settings
from core.enums import ModelKind
from core.exceptions import InvalidArgument
from filters.models import ModelParams, load_model_config, bundled_params
from services.backtest import ExecutionConfig
from services.strategy import StrategyConfig

logger = structlog.get_logger(__name__)


class OutputSet:
    """Files written by one command, removable as a group on failure"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.directory / name
        self.written.append(target)
        return target

    def discard(self, keep: tuple = ()) -> None:
        for target in self.written:
            if target.name in keep:
                continue
            if target.exists():
                target.unlink()
                logger.info("partial output removed", path=str(target))


def add_input_arg(parser: argparse.ArgumentParser, help_text: str = "bar CSV (date,open,high,low,close[,volume])") -> None:
    parser.add_argument("--input", required=True, type=Path, help=help_text)


def add_out_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help=f"output directory (default {settings.output_dir})")


def add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", default=None, help="kalman model: one|two|three|four (or 1-4, kf1-kf4)")
    parser.add_argument("--params", type=Path, default=None, help="model config JSON; bundled parameters otherwise")


def add_strategy_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--offset", type=float, default=None, help="minimum prediction-close gap in points")
    parser.add_argument("--warmup", type=int, default=None, help="bars before the first signal")


def add_execution_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--point-value", type=float, default=None, help=f"currency per index point (default {settings.point_value:g})")
    parser.add_argument("--commission", type=float, default=None, help=f"round-trip commission per contract (default {settings.commission_round_trip:g})")
    parser.add_argument("--contracts", type=int, default=None, help=f"contracts traded (default {settings.contracts})")


def output_dir(args: argparse.Namespace) -> Path:
    return args.out if args.out is not None else settings.output_dir


def resolve_params(args: argparse.Namespace, default_kind: Optional[ModelKind] = None) -> ModelParams:
    """--params file wins; otherwise the bundled parameters for --model"""
    if args.params is not None:
        if not args.params.exists():
            raise InvalidArgument(f"model config {args.params} does not exist")
        params = load_model_config(args.params)
        if args.model is not None and parse_kind(args.model) is not params.kind:
            raise InvalidArgument(f"--model {args.model} disagrees with {args.params} ({params.kind.value})")
        return params
    kind = args.model or default_kind
    if kind is None:
        raise InvalidArgument("either --model or --params is required")
    return bundled_params(parse_kind(kind))


def parse_kind(value) -> ModelKind:
    try:
        return ModelKind.parse(value)
    except ValueError:
        raise InvalidArgument(f"unknown model {value!r}")


def strategy_config(args: argparse.Namespace) -> StrategyConfig:
    values = {}
    if args.offset is not None:
        values["offset"] = args.offset
    if args.warmup is not None:
        values["warmup"] = args.warmup
    return build_config(StrategyConfig, values)


def execution_config(args: argparse.Namespace) -> ExecutionConfig:
    values = {}
    if args.point_value is not None:
        values["point_value"] = args.point_value
    if args.commission is not None:
        values["commission_round_trip"] = args.commission
    if args.contracts is not None:
        values["contracts"] = args.contracts
    return build_config(ExecutionConfig, values)


def build_config(model, values: dict):
    try:
        return model(**values)
    except ValueError as e:
        raise InvalidArgument(str(e))


def require_input(path: Path) -> Path:
    if not path.exists():
        raise InvalidArgument(f"input {path} does not exist")
    return path
