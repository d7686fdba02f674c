"""
`smooth`: overlay of a moving average or Kalman filter on the closes
"""

import argparse

import numpy as np
import pandas as pd
import structlog

from cli.common import (
    OutputSet,
    add_input_arg,
    add_model_args,
    add_out_arg,
    build_config,
    require_input,
    resolve_params,
)
from core.config import settings
from core.enums import Indicator
from filters.kalman import filter_series
from filters.lag_algebra import indicator_warmup, smooth
from filters.models import build_spec
from integrations.market_data import load_csv
from services.strategy import StrategyConfig

logger = structlog.get_logger(__name__)

OVERLAY_COLUMNS = ["date", "close", "indicator", "predicted", "corrected", "warmup"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("smooth", help="write overlay.csv for one indicator")
    add_input_arg(parser)
    parser.add_argument(
        "--indicator",
        required=True,
        choices=[i.value for i in Indicator],
        help="moving average or kalman model",
    )
    parser.add_argument("--period", type=int, default=None, help=f"moving-average period (default {settings.default_ma_period})")
    parser.add_argument("--warmup", type=int, default=None, help="kalman warm-up bars")
    add_model_args(parser)
    add_out_arg(parser)
    parser.set_defaults(handler=run)


def overlay_frame(bars, indicator: Indicator, args: argparse.Namespace) -> pd.DataFrame:
    closes = bars.closes
    if indicator.is_kalman:
        params = resolve_params(args, default_kind=indicator.model_kind)
        warmup = build_config(StrategyConfig, {"warmup": args.warmup}).resolved_warmup(params)
        run = filter_series(build_spec(params, bars), closes, warmup=min(warmup, len(bars)))
        line, predicted, corrected = run.corrected, run.predicted, run.corrected
    else:
        period = settings.default_ma_period if args.period is None else args.period
        line = smooth(closes, indicator, period)
        warmup = indicator_warmup(indicator, period)
        predicted = corrected = np.full(len(bars), np.nan)

    return pd.DataFrame(
        {
            "date": [d.isoformat() for d in bars.dates],
            "close": closes,
            "indicator": line,
            "predicted": predicted,
            "corrected": corrected,
            "warmup": np.arange(len(bars)) < warmup,
        },
        columns=OVERLAY_COLUMNS,
    )


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    bars = load_csv(require_input(args.input))
    indicator = Indicator(args.indicator)
    frame = overlay_frame(bars, indicator, args)
    target = outputs.path("overlay.csv")
    frame.to_csv(target, index=False, float_format="%.2f")
    logger.info("overlay written", indicator=indicator.value, rows=len(frame), path=str(target))
    return 0
