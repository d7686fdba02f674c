"""
Prediction-vs-close trading rule, stop-and-reverse
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from core.enums import Target
from filters.kalman import FilterRun, filter_series
from filters.models import ModelParams, build_spec
from integrations.market_data.bars import BarSeries

logger = structlog.get_logger(__name__)


class StrategyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    offset: float = Field(default_factory=lambda: settings.default_offset, ge=0.0)
    warmup: Optional[int] = Field(default=None, ge=0)

    def resolved_warmup(self, params: Optional[ModelParams] = None) -> int:
        """Explicit warm-up, else max(default warm-up, oscillator period)"""
        if self.warmup is not None:
            return self.warmup
        period = params.period if params is not None else 0
        return max(settings.default_warmup, period)


@dataclass(frozen=True)
class Signal:
    target: Target
    at: int


def decide(prediction: float, last_close: float, cfg: StrategyConfig) -> Target:
    if prediction > last_close + cfg.offset:
        return Target.LONG
    if prediction < last_close - cfg.offset:
        return Target.SHORT
    return Target.HOLD


def next_bar_predictions(run: FilterRun) -> np.ndarray:
    """Prediction of close[t+1] made with information up to t, for every t"""
    return np.append(run.predicted[1:], run.forecast)


def run_strategy(bars: BarSeries, params: ModelParams, cfg: Optional[StrategyConfig] = None) -> List[Signal]:
    """One signal per bar from the warm-up on"""
    cfg = cfg or StrategyConfig()
    warmup = cfg.resolved_warmup(params)
    bars.require(warmup + 1, f"to trade after a {warmup}-bar warm-up")

    spec = build_spec(params, bars)
    closes = bars.closes
    run = filter_series(spec, closes, warmup=warmup)
    ahead = next_bar_predictions(run)

    signals = [Signal(target=decide(ahead[t], closes[t], cfg), at=t) for t in range(warmup, len(bars))]
    logger.debug(
        "strategy run",
        model=params.kind.value,
        warmup=warmup,
        offset=cfg.offset,
        active=sum(s.target is not Target.HOLD for s in signals),
    )
    return signals


def positions(signals: List[Signal], length: int) -> np.ndarray:
    """Stop-and-reverse position per bar: +1 long, -1 short, 0 before the first entry"""
    path = np.zeros(length, dtype=int)
    current = 0
    by_bar = {s.at: s.target for s in signals}
    for t in range(length):
        target = by_bar.get(t, Target.HOLD)
        if target is Target.LONG:
            current = 1
        elif target is Target.SHORT:
            current = -1
        path[t] = current
    return path

