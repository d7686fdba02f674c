from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from integrations.market_data import BarSeries, load_csv, synthesize
from services.backtest import load_ledger_csv

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def bars_from_closes(closes, start="2015-03-02", spread=0.5) -> BarSeries:
    """Bars whose open is the previous close and whose range wraps open and close"""
    closes = np.asarray(closes, dtype=float)
    opens = np.concatenate([[closes[0]], closes[:-1]])
    highs = np.maximum(opens, closes) + spread
    lows = np.minimum(opens, closes) - spread
    dates = pd.bdate_range(start=start, periods=closes.size).date
    return BarSeries.from_arrays(dates, opens, highs, lows, closes, instrument="TEST")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def es_bars() -> BarSeries:
    return load_csv(FIXTURES / "synthetic_es.csv")


@pytest.fixture
def trend_bars() -> BarSeries:
    return synthesize("trend", n=300, seed=1, noise=0.0, start=2000.0, slope=1.0)


@pytest.fixture
def noisy_bars() -> BarSeries:
    return synthesize("random-walk", n=500, seed=7, noise=4.0)


@pytest.fixture
def ledger_rows():
    return load_ledger_csv(FIXTURES / "sample_ledger.csv")


@pytest.fixture
def first_day() -> date:
    return date(2015, 3, 2)
