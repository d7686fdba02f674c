"""
Performance statistics for a closed-trade ledger, split All / Long / Short
"""

import json
import math
from datetime import date
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel

from core.enums import Direction
from core.exceptions import EmptyLedger, InvalidArgument
from services.backtest import Trade

logger = structlog.get_logger(__name__)

DAYS_PER_MONTH = 30.4375
UNBOUNDED = math.inf


class SideStatistics(BaseModel):
    net_profit: float = 0.0
    gross_profit: float = 0.0
    gross_loss: float = 0.0
    total_commission: float = 0.0
    drawdown: float = 0.0
    closed_trade_drawdown: float = 0.0
    sharpe_ratio: float = 0.0
    profit_factor: float = 0.0
    recovery_ratio: float = 0.0
    num_trades: int = 0
    winning_trades: int = 0
    avg_trade_profit: float = 0.0
    avg_winning_trade: float = 0.0
    largest_winning_trade: float = 0.0
    max_consecutive_winners: int = 0
    losing_trades: int = 0
    avg_losing_trade: float = 0.0
    largest_losing_trade: float = 0.0
    max_consecutive_losers: int = 0
    ratio_avg_win_avg_loss: float = 0.0
    winning_over_total: float = 0.0
    avg_time_in_market_days: float = 0.0
    profit_per_month: float = 0.0
    max_time_to_recover_days: int = 0


class PerformanceReport(BaseModel):
    all: SideStatistics
    long: SideStatistics
    short: SideStatistics
    span_start: date
    span_end: date
    months: float

    def to_json(self, indent: int = 2) -> str:
        """JSON with unbounded ratios written as the string "inf" """
        return json.dumps(json_safe(self.model_dump()), indent=indent)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def json_safe(value):
    """Replace infinities with "inf" / "-inf" and dates with ISO strings"""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _longest_run(flags: Sequence[bool]) -> int:
    best = run = 0
    for flag in flags:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def max_drawdown(values: np.ndarray) -> float:
    """Most negative move from a running peak; the curve starts from 0"""
    if values.size == 0:
        return 0.0
    curve = np.concatenate([[0.0], values])
    return float(min(0.0, (curve - np.maximum.accumulate(curve)).min()))


def max_time_to_recover(dates: Sequence[date], values: np.ndarray, start: date, end: date) -> int:
    """Longest number of days between an equity high and its next reattainment.

    A drawdown still open at `end` counts up to `end`.
    """
    peak_value, peak_date = 0.0, start
    underwater = False
    longest = 0
    for day, value in zip(dates, values):
        if value >= peak_value:
            if underwater:
                longest = max(longest, (day - peak_date).days)
            peak_value, peak_date, underwater = value, day, False
        else:
            underwater = True
    if underwater:
        longest = max(longest, (end - peak_date).days)
    return longest


def monthly_pnl(dates: Sequence[date], values: np.ndarray) -> pd.Series:
    """Calendar-month PnL of an equity curve, indexed by month.

    The first month is measured from a zero baseline.
    """
    if len(dates) == 0:
        return pd.Series([], index=pd.PeriodIndex([], freq="M", name="month"), dtype=float, name="pnl")
    curve = pd.Series(np.asarray(values, dtype=float), index=pd.to_datetime(list(dates)))
    month_end = curve.groupby(curve.index.to_period("M")).last()
    monthly = month_end.diff()
    monthly.iloc[0] = month_end.iloc[0]
    monthly.index.name = "month"
    return monthly.rename("pnl")


def monthly_to_frame(monthly: pd.Series) -> pd.DataFrame:
    """month / pnl / cumulative_pnl columns with "YYYY-MM" months"""
    return pd.DataFrame(
        {
            "month": [str(p) for p in monthly.index],
            "pnl": monthly.to_numpy(dtype=float),
            "cumulative_pnl": monthly.cumsum().to_numpy(dtype=float),
        }
    )


def write_monthly_csv(equity: pd.DataFrame, path: Union[str, Path], column: str = "mtm_pnl") -> Path:
    path = Path(path)
    curve = equity[column]
    monthly = monthly_pnl([ts.date() for ts in curve.index], curve.to_numpy(dtype=float))
    monthly_to_frame(monthly).to_csv(path, index=False, float_format="%.1f")
    return path


def monthly_sharpe(dates: Sequence[date], values: np.ndarray) -> float:
    """Annualized mean / stddev of calendar-month PnL taken from an equity curve"""
    monthly = monthly_pnl(dates, values)
    if monthly.size < 2:
        return 0.0
    std = float(monthly.std(ddof=1))
    if std == 0 or not np.isfinite(std):
        return 0.0
    return float(monthly.mean() / std * math.sqrt(12.0))


def _ratio(numerator: float, denominator: float) -> float:
    if denominator > 0:
        return numerator / denominator
    return UNBOUNDED if numerator > 0 else 0.0


def _side_statistics(
    trades: Sequence[Trade],
    months: float,
    span: Tuple[date, date],
    equity: Optional[pd.Series] = None,
) -> SideStatistics:
    if not trades:
        return SideStatistics()

    profits = np.array([t.profit for t in trades])
    wins = profits > 0
    losses = ~wins  # break-even counts as a loss
    exit_dates = [t.exit_date for t in trades]
    closed_curve = np.cumsum(profits)

    gross_profit = float(profits[wins].sum())
    gross_loss = float(profits[losses].sum())
    net = float(profits.sum())
    closed_dd = max_drawdown(closed_curve)

    if equity is not None and not equity.empty:
        curve_dates = [ts.date() for ts in equity.index]
        curve_values = equity.to_numpy(dtype=float)
        drawdown = max_drawdown(curve_values)
    else:
        curve_dates, curve_values, drawdown = exit_dates, closed_curve, closed_dd

    avg_win = float(profits[wins].mean()) if wins.any() else 0.0
    avg_loss = float(profits[losses].mean()) if losses.any() else 0.0

    return SideStatistics(
        net_profit=net,
        gross_profit=gross_profit,
        gross_loss=gross_loss,
        total_commission=float(sum(t.commission for t in trades)),
        drawdown=drawdown,
        closed_trade_drawdown=closed_dd,
        sharpe_ratio=monthly_sharpe(curve_dates, curve_values),
        profit_factor=_ratio(gross_profit, abs(gross_loss)),
        recovery_ratio=_ratio(net, abs(drawdown)),
        num_trades=len(trades),
        winning_trades=int(wins.sum()),
        avg_trade_profit=net / len(trades),
        avg_winning_trade=avg_win,
        largest_winning_trade=float(profits[wins].max()) if wins.any() else 0.0,
        max_consecutive_winners=_longest_run(wins),
        losing_trades=int(losses.sum()),
        avg_losing_trade=avg_loss,
        largest_losing_trade=float(profits[losses].min()) if losses.any() else 0.0,
        max_consecutive_losers=_longest_run(losses),
        ratio_avg_win_avg_loss=_ratio(avg_win, abs(avg_loss)),
        winning_over_total=float(wins.mean()),
        avg_time_in_market_days=float(np.mean([t.days_in_position for t in trades])),
        profit_per_month=net / months,
        max_time_to_recover_days=max_time_to_recover(curve_dates, curve_values, span[0], span[1]),
    )


def ledger_span(trades: Sequence[Trade]) -> Tuple[date, date]:
    entries = [t.entry_date for t in trades if t.entry_date is not None]
    exits = [t.exit_date for t in trades if t.exit_date is not None]
    if not entries or not exits:
        raise InvalidArgument("trades carry no dates; pass an explicit span")
    return min(entries), max(exits)


def compute_report(
    trades: Sequence[Trade],
    equity: Optional[pd.DataFrame] = None,
    span: Optional[Tuple[date, date]] = None,
) -> PerformanceReport:
    """Statistics block for All / Long / Short.

    `drawdown` for All uses the mark-to-market curve when `equity` is given,
    the closed-trade curve otherwise; the side splits always use their own
    closed-trade curves.
    """
    if not trades:
        raise EmptyLedger("no closed trades to report on")
    span = span or ledger_span(trades)
    months = max((span[1] - span[0]).days, 1) / DAYS_PER_MONTH

    mtm = equity["mtm_pnl"] if equity is not None else None
    longs: List[Trade] = [t for t in trades if t.direction is Direction.LONG]
    shorts: List[Trade] = [t for t in trades if t.direction is Direction.SHORT]

    report = PerformanceReport(
        all=_side_statistics(trades, months, span, equity=mtm),
        long=_side_statistics(longs, months, span),
        short=_side_statistics(shorts, months, span),
        span_start=span[0],
        span_end=span[1],
        months=months,
    )
    logger.info(
        "report computed",
        trades=report.all.num_trades,
        net=round(report.all.net_profit, 1),
        drawdown=round(report.all.drawdown, 1),
    )
    return report
