"""
Side-by-side backtests of several Kalman models on one bar series
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
import structlog

from core.exceptions import InvalidArgument
from filters.models import ModelParams
from integrations.market_data.bars import BarSeries
from services.backtest import ExecutionConfig, Trade, execute
from services.reports import PerformanceReport, compute_report, monthly_pnl
from services.strategy import StrategyConfig, run_strategy

logger = structlog.get_logger(__name__)

COMPARISON_COLUMNS = [
    "model",
    "net_profit",
    "gross_profit",
    "gross_loss",
    "drawdown",
    "num_trades",
    "total_commission",
    "recovery_ratio",
    "sharpe_ratio",
    "profit_factor",
    "winning_over_total",
]


@dataclass(frozen=True)
class ModelOutcome:
    params: ModelParams
    trades: List[Trade]
    equity: pd.DataFrame
    report: Optional[PerformanceReport]

    @property
    def label(self) -> str:
        return self.params.kind.value


class ComparisonService:
    """Runs every model through the same strategy and execution settings"""

    def __init__(
        self,
        strategy: Optional[StrategyConfig] = None,
        execution: Optional[ExecutionConfig] = None,
    ):
        self.strategy = strategy or StrategyConfig()
        self.execution = execution or ExecutionConfig()

    def evaluate(self, bars: BarSeries, params: ModelParams) -> ModelOutcome:
        signals = run_strategy(bars, params, self.strategy)
        trades, equity = execute(signals, bars, self.execution)
        # a model that never trades stays in the table with zeros
        report = compute_report(trades, equity) if trades else None
        return ModelOutcome(params=params, trades=trades, equity=equity, report=report)

    def run(self, bars: BarSeries, models: Sequence[ModelParams]) -> List[ModelOutcome]:
        if not models:
            raise InvalidArgument("nothing to compare: no models given")
        labels = [p.kind.value for p in models]
        if len(set(labels)) != len(labels):
            raise InvalidArgument(f"each model may appear once, got {', '.join(labels)}")

        outcomes = [self.evaluate(bars, params) for params in models]
        for outcome in outcomes:
            logger.info(
                "model evaluated",
                model=outcome.label,
                trades=len(outcome.trades),
                net=round(outcome.trades[-1].cumulative_pnl, 1) if outcome.trades else 0.0,
            )
        return outcomes

    @staticmethod
    def summary_row(outcome: ModelOutcome) -> dict:
        row = {column: 0.0 for column in COMPARISON_COLUMNS}
        row["model"] = outcome.label
        row["num_trades"] = 0
        if outcome.report is not None:
            stats = outcome.report.all
            row.update({column: getattr(stats, column) for column in COMPARISON_COLUMNS[1:]})
        return row

    def summary_frame(self, outcomes: Sequence[ModelOutcome]) -> pd.DataFrame:
        return pd.DataFrame([self.summary_row(o) for o in outcomes], columns=COMPARISON_COLUMNS)

    @staticmethod
    def monthly_frame(outcomes: Sequence[ModelOutcome]) -> pd.DataFrame:
        """One mark-to-market monthly PnL column per model"""
        columns = {}
        for outcome in outcomes:
            curve = outcome.equity["mtm_pnl"]
            columns[outcome.label] = monthly_pnl([ts.date() for ts in curve.index], curve.to_numpy(dtype=float))
        frame = pd.DataFrame(columns).fillna(0.0)
        frame.index = [str(p) for p in frame.index]
        frame.index.name = "month"
        return frame.reset_index()

    def write(self, outcomes: Sequence[ModelOutcome], summary_path: Union[str, Path], monthly_path: Union[str, Path]) -> None:
        self.summary_frame(outcomes).to_csv(Path(summary_path), index=False, float_format="%.2f")
        self.monthly_frame(outcomes).to_csv(Path(monthly_path), index=False, float_format="%.1f")
