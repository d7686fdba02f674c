"""
Daily OHLCV bars and validated bar series
"""

from datetime import date
from typing import Iterator, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.exceptions import InsufficientHistory, OrderViolation, RangeViolation


class Bar(BaseModel):
    """One OHLCV observation; volume is optional"""

    model_config = ConfigDict(frozen=True)

    timestamp: date
    open: float
    high: float
    low: float
    close: float
    volume: Optional[float] = None

    @model_validator(mode="after")
    def check_ranges(self) -> "Bar":
        prices = (self.open, self.high, self.low, self.close)
        if any(not np.isfinite(p) or p <= 0 for p in prices):
            raise RangeViolation(f"prices must be strictly positive: {prices}")
        if self.high < self.low:
            raise RangeViolation(f"high {self.high} below low {self.low}")
        if not (self.low <= self.open <= self.high):
            raise RangeViolation(f"open {self.open} outside [{self.low}, {self.high}]")
        if not (self.low <= self.close <= self.high):
            raise RangeViolation(f"close {self.close} outside [{self.low}, {self.high}]")
        if self.volume is not None and self.volume < 0:
            raise RangeViolation(f"negative volume {self.volume}")
        return self


class BarSeries(BaseModel):
    """Ordered, immutable bar series for one instrument"""

    model_config = ConfigDict(frozen=True)

    bars: tuple
    instrument: str = ""

    @field_validator("bars", mode="before")
    @classmethod
    def to_tuple(cls, v):
        return tuple(v)

    @model_validator(mode="after")
    def check_order(self) -> "BarSeries":
        for i in range(1, len(self.bars)):
            if self.bars[i].timestamp <= self.bars[i - 1].timestamp:
                raise OrderViolation(
                    f"timestamp {self.bars[i].timestamp} does not follow "
                    f"{self.bars[i - 1].timestamp}"
                )
        return self

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self) -> Iterator[Bar]:
        return iter(self.bars)

    def __getitem__(self, index: int) -> Bar:
        return self.bars[index]

    @property
    def closes(self) -> np.ndarray:
        return np.array([b.close for b in self.bars], dtype=float)

    @property
    def highs(self) -> np.ndarray:
        return np.array([b.high for b in self.bars], dtype=float)

    @property
    def lows(self) -> np.ndarray:
        return np.array([b.low for b in self.bars], dtype=float)

    @property
    def dates(self) -> List[date]:
        return [b.timestamp for b in self.bars]

    @property
    def has_volume(self) -> bool:
        return any(b.volume is not None for b in self.bars)

    def require(self, minimum: int = 1, purpose: str = "") -> "BarSeries":
        """Raise unless the series holds at least `minimum` bars"""
        if len(self.bars) < minimum:
            raise InsufficientHistory(
                f"series {self.instrument or '<unnamed>'} has {len(self.bars)} bars, "
                f"need {minimum}" + (f" {purpose}" if purpose else "")
            )
        return self

    @classmethod
    def from_arrays(
        cls,
        dates: Sequence[date],
        opens: Sequence[float],
        highs: Sequence[float],
        lows: Sequence[float],
        closes: Sequence[float],
        instrument: str = "",
    ) -> "BarSeries":
        bars = [
            Bar(timestamp=d, open=float(o), high=float(h), low=float(l), close=float(c))
            for d, o, h, l, c in zip(dates, opens, highs, lows, closes)
        ]
        return cls(bars=bars, instrument=instrument)
