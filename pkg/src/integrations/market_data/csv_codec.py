"""
CSV codec for daily bars: `date,open,high,low,close[,volume]`
"""

import io
from datetime import date
from pathlib import Path
from typing import BinaryIO, Optional, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import ValidationError

from core.config import settings
from core.exceptions import MalformedRow, OrderViolation, RangeViolation
from integrations.market_data.bars import Bar, BarSeries

logger = structlog.get_logger(__name__)

REQUIRED_COLUMNS = ["date", "open", "high", "low", "close"]
PRICE_COLUMNS = ["open", "high", "low", "close"]


def _parse_number(raw: str, column: str, line: int) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise MalformedRow(f"bad {column} value {raw!r}", line=line)
    if not np.isfinite(value):
        raise MalformedRow(f"non-finite {column} value {raw!r}", line=line)
    return value


def _parse_date(raw: str, line: int) -> date:
    try:
        return date.fromisoformat(raw.strip())
    except (AttributeError, ValueError):
        raise MalformedRow(f"bad date {raw!r}", line=line)


def _on_tick_grid(price: float, tick_size: float) -> bool:
    ticks = price / tick_size
    return abs(ticks - round(ticks)) < 1e-9


def parse_csv(
    source: Union[BinaryIO, bytes],
    instrument: str = "",
    check_ticks: bool = False,
    tick_size: Optional[float] = None,
) -> BarSeries:
    """Parse and validate a bar CSV; errors name the offending line"""
    raw = source if isinstance(source, bytes) else source.read()
    try:
        frame = pd.read_csv(
            io.BytesIO(raw),
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedRow(f"unreadable CSV: {e}")

    frame.columns = [str(c).strip().lower() for c in frame.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRow(f"missing columns {missing}", line=1)
    has_volume = "volume" in frame.columns
    tick = tick_size or settings.tick_size

    bars = []
    previous: Optional[date] = None
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + 2  # header is line 1
        record = row._asdict()
        timestamp = _parse_date(record["date"], line)
        prices = {c: _parse_number(record[c], c, line) for c in PRICE_COLUMNS}
        volume = None
        if has_volume and str(record["volume"]).strip() != "":
            volume = _parse_number(record["volume"], "volume", line)

        if previous is not None and timestamp <= previous:
            raise OrderViolation(f"timestamp {timestamp} does not follow {previous}", line=line)
        if check_ticks:
            off_grid = [c for c, p in prices.items() if not _on_tick_grid(p, tick)]
            if off_grid:
                raise RangeViolation(f"{off_grid} not on the {tick} tick grid", line=line)

        try:
            bars.append(Bar(timestamp=timestamp, volume=volume, **prices))
        except RangeViolation as e:
            raise RangeViolation(str(e), line=line)
        except ValidationError as e:
            raise MalformedRow(str(e), line=line)
        previous = timestamp

    logger.info("bars parsed", instrument=instrument, rows=len(bars))
    return BarSeries(bars=bars, instrument=instrument)


def load_csv(path: Union[str, Path], instrument: Optional[str] = None, **kwargs) -> BarSeries:
    path = Path(path)
    with path.open("rb") as handle:
        return parse_csv(handle, instrument=instrument or path.stem, **kwargs)


def format_price(value: float) -> str:
    """At most 6 decimals, trailing zeros trimmed"""
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def serialize_csv(series: BarSeries) -> str:
    include_volume = series.has_volume
    header = REQUIRED_COLUMNS + (["volume"] if include_volume else [])
    lines = [",".join(header)]
    for bar in series:
        cells = [bar.timestamp.isoformat()] + [format_price(getattr(bar, c)) for c in PRICE_COLUMNS]
        if include_volume:
            cells.append("" if bar.volume is None else format_price(bar.volume))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(series: BarSeries, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(serialize_csv(series), encoding="utf-8")
    return path


__all__ = [
    "parse_csv",
    "load_csv",
    "serialize_csv",
    "write_csv",
    "format_price",
]
