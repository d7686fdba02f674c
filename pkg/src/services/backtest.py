"""
Trade execution and ledger accounting for one futures contract line.

Fills happen at the signal bar's close. Positions are stop-and-reverse:
an opposite signal closes the open trade and opens the other side at the
same price. The open trade is closed on the final bar.
"""

from datetime import date
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from dateutil import parser as date_parser
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from core.enums import Direction
from core.exceptions import InvalidArgument
from integrations.market_data.bars import BarSeries
from services.strategy import Signal, positions

logger = structlog.get_logger(__name__)

TRADE_COLUMNS = [
    "Trade",
    "Direction",
    "Entry date",
    "Entry price",
    "Exit date",
    "Exit price",
    "Profit",
    "PnL",
    "Commission",
    "Days in position",
]

# position path value -> direction held
HELD = {1: Direction.LONG, -1: Direction.SHORT}


class ExecutionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    point_value: float = Field(default_factory=lambda: settings.point_value, gt=0.0)
    commission_round_trip: float = Field(default_factory=lambda: settings.commission_round_trip, ge=0.0)
    contracts: int = Field(default_factory=lambda: settings.contracts, ge=1)

    @property
    def commission(self) -> float:
        """Round-trip commission for the whole position"""
        return self.commission_round_trip * self.contracts

    def profit(self, direction: Direction, entry_price: float, exit_price: float) -> float:
        gross = direction.sign * (exit_price - entry_price) * self.point_value * self.contracts
        return gross - self.commission


class Trade(BaseModel):
    model_config = ConfigDict(frozen=True)

    direction: Direction
    entry_date: Optional[date] = None
    exit_date: Optional[date] = None
    entry_price: float
    exit_price: float
    profit: float
    cumulative_pnl: float
    commission: float
    days_in_position: int = 1


class LedgerRow(BaseModel):
    """(direction, entry price, exit price) with optional dates"""

    model_config = ConfigDict(frozen=True)

    direction: Direction
    entry_price: float
    exit_price: float
    entry_date: Optional[date] = None
    exit_date: Optional[date] = None


class _OpenPosition:
    def __init__(self, direction: Direction, index: int, price: float):
        self.direction = direction
        self.index = index
        self.price = price


def _weekdays_held(entry: Optional[date], exit: Optional[date]) -> int:
    """Weekdays from entry to exit, both ends included, at least 1"""
    if entry is None or exit is None:
        return 1
    return max(1, int(np.busday_count(entry, exit)) + 1)


def execute(
    signals: Sequence[Signal],
    bars: BarSeries,
    cfg: Optional[ExecutionConfig] = None,
) -> Tuple[List[Trade], pd.DataFrame]:
    """Turn signals into closed trades and a per-bar equity frame.

    The equity frame is indexed by bar date with `closed_pnl` (realized) and
    `mtm_pnl` (realized plus the open trade marked at the close, net of its
    commission).
    """
    cfg = cfg or ExecutionConfig()
    closes = bars.closes
    dates = bars.dates
    last = len(bars) - 1

    trades: List[Trade] = []
    cumulative = 0.0
    position: Optional[_OpenPosition] = None

    def close_position(index: int) -> None:
        nonlocal cumulative, position
        price = float(closes[index])
        profit = cfg.profit(position.direction, position.price, price)
        cumulative += profit
        trades.append(
            Trade(
                direction=position.direction,
                entry_date=dates[position.index],
                exit_date=dates[index],
                entry_price=position.price,
                exit_price=price,
                profit=profit,
                cumulative_pnl=cumulative,
                commission=cfg.commission,
                days_in_position=index - position.index + 1,
            )
        )
        position = None

    for signal in signals:
        if not 0 <= signal.at <= last:
            raise InvalidArgument(f"signal at bar {signal.at} outside series of {len(bars)} bars")
    path = positions(signals, len(bars))

    closed_curve = np.zeros(len(bars))
    mtm_curve = np.zeros(len(bars))
    for t in range(len(bars)):
        wanted = HELD.get(int(path[t]))
        if wanted is not None and (position is None or position.direction is not wanted):
            if position is not None:
                close_position(t)
            # no new trade on the final bar
            if t < last:
                position = _OpenPosition(wanted, t, float(closes[t]))

        if t == last and position is not None:
            close_position(t)

        closed_curve[t] = cumulative
        mtm_curve[t] = cumulative
        if position is not None:
            mtm_curve[t] += cfg.profit(position.direction, position.price, float(closes[t]))

    equity = pd.DataFrame(
        {"closed_pnl": closed_curve, "mtm_pnl": mtm_curve},
        index=pd.Index(pd.to_datetime(dates), name="date"),
    )
    logger.info("signals executed", trades=len(trades), net=round(cumulative, 2))
    return trades, equity


def replay_ledger(rows: Iterable[LedgerRow], cfg: Optional[ExecutionConfig] = None) -> List[Trade]:
    """Recompute profit and cumulative PnL from prices alone"""
    cfg = cfg or ExecutionConfig()
    trades: List[Trade] = []
    cumulative = 0.0
    for row in rows:
        profit = cfg.profit(row.direction, row.entry_price, row.exit_price)
        cumulative += profit
        trades.append(
            Trade(
                direction=row.direction,
                entry_date=row.entry_date,
                exit_date=row.exit_date,
                entry_price=row.entry_price,
                exit_price=row.exit_price,
                profit=profit,
                cumulative_pnl=cumulative,
                commission=cfg.commission,
                days_in_position=_weekdays_held(row.entry_date, row.exit_date),
            )
        )
    return trades


def _parse_ledger_date(raw) -> Optional[date]:
    if raw is None or (isinstance(raw, float) and np.isnan(raw)) or str(raw).strip() == "":
        return None
    # accepts ISO dates and the "Mar-31-15" style
    return date_parser.parse(str(raw)).date()


def load_ledger_csv(path: Union[str, Path]) -> List[LedgerRow]:
    """Read a (direction, entry_date, entry_price, exit_date, exit_price) ledger.

    A blank entry price chains from the previous exit price. Other columns,
    such as a recorded profit, are ignored.
    """
    try:
        frame = pd.read_csv(path, dtype={"direction": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidArgument(f"unreadable ledger {path}: {e}")
    frame.columns = [str(c).strip().lower().replace(" ", "_") for c in frame.columns]
    if "entry_price" not in frame.columns:
        frame["entry_price"] = np.nan

    rows: List[LedgerRow] = []
    previous_exit: Optional[float] = None
    for line, record in enumerate(frame.to_dict("records"), start=2):
        entry = record.get("entry_price")
        if entry is None or pd.isna(entry):
            if previous_exit is None:
                raise InvalidArgument("first ledger row needs an entry price")
            entry = previous_exit
        try:
            row = LedgerRow(
                direction=Direction(str(record["direction"]).strip().lower()),
                entry_price=float(entry),
                exit_price=float(record["exit_price"]),
                entry_date=_parse_ledger_date(record.get("entry_date")),
                exit_date=_parse_ledger_date(record.get("exit_date")),
            )
        except KeyError as e:
            raise InvalidArgument(f"ledger is missing column {e}")
        except (ValueError, OverflowError) as e:
            raise InvalidArgument(f"bad ledger row at line {line}: {e}")
        rows.append(row)
        previous_exit = row.exit_price
    return rows


def trades_to_frame(trades: Sequence[Trade]) -> pd.DataFrame:
    records = [
        {
            "Trade": i,
            "Direction": t.direction.value.capitalize(),
            "Entry date": t.entry_date.isoformat() if t.entry_date else "",
            "Entry price": f"{t.entry_price:.2f}",
            "Exit date": t.exit_date.isoformat() if t.exit_date else "",
            "Exit price": f"{t.exit_price:.2f}",
            "Profit": f"{t.profit:.1f}",
            "PnL": f"{t.cumulative_pnl:.1f}",
            "Commission": f"{t.commission:.1f}",
            "Days in position": t.days_in_position,
        }
        for i, t in enumerate(trades, start=1)
    ]
    return pd.DataFrame(records, columns=TRADE_COLUMNS)


def write_trades_csv(trades: Sequence[Trade], path: Union[str, Path]) -> Path:
    path = Path(path)
    trades_to_frame(trades).to_csv(path, index=False)
    return path


def equity_to_frame(equity: pd.DataFrame) -> pd.DataFrame:
    """date / closed_pnl / mtm_pnl columns with ISO dates"""
    frame = equity.reset_index()
    frame["date"] = frame["date"].dt.strftime("%Y-%m-%d")
    return frame[["date", "closed_pnl", "mtm_pnl"]]


def write_equity_csv(equity: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    equity_to_frame(equity).to_csv(path, index=False, float_format="%.1f")
    return path
