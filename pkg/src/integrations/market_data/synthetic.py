"""
Deterministic synthetic bar series for experiments and test fixtures
"""

import numpy as np
import pandas as pd
import structlog

from core.enums import SyntheticKind
from core.exceptions import InvalidArgument
from integrations.market_data.bars import BarSeries

logger = structlog.get_logger(__name__)

FIRST_SESSION = "2015-03-02"
MIN_PRICE = 1.0


def _closes(kind: SyntheticKind, n: int, rng: np.random.Generator, noise: float,
            start: float, slope: float, band: float) -> np.ndarray:
    shocks = rng.standard_normal(n) * noise
    steps = np.arange(n, dtype=float)

    if kind is SyntheticKind.TREND:
        closes = start + slope * steps + shocks
    elif kind is SyntheticKind.RANGE:
        # oscillation inside [start - band, start + band]
        cycle = 0.6 * band * np.sin(2.0 * np.pi * steps / 20.0)
        closes = np.clip(start + cycle + shocks, start - band, start + band)
    else:
        closes = start + np.concatenate([[0.0], np.cumsum(shocks[1:])])

    return np.maximum(closes, MIN_PRICE)


def synthesize(
    kind,
    n: int,
    seed: int,
    noise: float,
    start: float = 2000.0,
    slope: float = 1.0,
    band: float = 50.0,
    instrument: str = "SYNTH",
) -> BarSeries:
    """Bars whose closes follow the named process; same seed, same series"""
    kind = SyntheticKind(kind)
    if n < 2:
        raise InvalidArgument(f"n must be at least 2, got {n}")
    if noise < 0:
        raise InvalidArgument(f"noise must be non-negative, got {noise}")
    if start <= MIN_PRICE:
        raise InvalidArgument(f"start price must exceed {MIN_PRICE}")
    if kind is SyntheticKind.RANGE and band <= 0:
        raise InvalidArgument("band must be positive")

    rng = np.random.default_rng(seed)
    closes = _closes(kind, n, rng, noise, start, slope, band)

    opens = np.concatenate([[closes[0]], closes[:-1]])
    wick_scale = max(noise, 0.25)
    upper = np.abs(rng.standard_normal(n)) * wick_scale * 0.5
    lower = np.abs(rng.standard_normal(n)) * wick_scale * 0.5
    highs = np.maximum(opens, closes) + upper
    lows = np.maximum(np.minimum(opens, closes) - lower, MIN_PRICE / 2.0)

    dates = pd.bdate_range(start=FIRST_SESSION, periods=n).date
    logger.debug("synthetic series generated", kind=kind.value, n=n, seed=seed, noise=noise)
    return BarSeries.from_arrays(dates, opens, highs, lows, closes, instrument=instrument)
