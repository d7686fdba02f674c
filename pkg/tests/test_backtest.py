import csv
from datetime import date

import numpy as np
import pytest

from core.enums import Direction, Target
from core.exceptions import InvalidArgument
from services.backtest import (
    TRADE_COLUMNS,
    ExecutionConfig,
    LedgerRow,
    execute,
    load_ledger_csv,
    replay_ledger,
    trades_to_frame,
    write_equity_csv,
    write_trades_csv,
)
from services.strategy import Signal, StrategyConfig, run_strategy
from filters.models import bundled_params

from conftest import bars_from_closes


def test_profit_arithmetic():
    cfg = ExecutionConfig(point_value=50.0, commission_round_trip=4.0, contracts=1)
    assert cfg.profit(Direction.SHORT, 2033.5, 2026.0) == pytest.approx(371.0)
    assert cfg.profit(Direction.SHORT, 2043.0, 1924.5) == pytest.approx(5921.0)
    assert cfg.profit(Direction.LONG, 2000.0, 2000.0) == pytest.approx(-4.0)


def test_commission_scales_with_contracts():
    cfg = ExecutionConfig(point_value=50.0, commission_round_trip=4.0, contracts=2)
    assert cfg.commission == 8.0
    assert cfg.profit(Direction.LONG, 100.0, 101.0) == pytest.approx(92.0)


@pytest.mark.parametrize(
    "values",
    [{"point_value": 0.0}, {"commission_round_trip": -1.0}, {"contracts": 0}],
)
def test_execution_config_validation(values):
    with pytest.raises(ValueError):
        ExecutionConfig(**values)


def test_execute_stop_and_reverse():
    bars = bars_from_closes([100.0, 101.0, 103.0, 102.0, 104.0, 100.0])
    signals = [
        Signal(Target.HOLD, 0),
        Signal(Target.LONG, 1),
        Signal(Target.LONG, 2),
        Signal(Target.SHORT, 3),
        Signal(Target.HOLD, 4),
        Signal(Target.LONG, 5),
    ]
    trades, equity = execute(signals, bars, ExecutionConfig())

    assert [t.direction for t in trades] == [Direction.LONG, Direction.SHORT]
    assert [t.entry_price for t in trades] == [101.0, 102.0]
    assert [t.exit_price for t in trades] == [102.0, 100.0]
    assert [t.profit for t in trades] == pytest.approx([46.0, 96.0])
    assert [t.cumulative_pnl for t in trades] == pytest.approx([46.0, 142.0])
    assert [t.days_in_position for t in trades] == [3, 3]
    assert trades[0].entry_date == bars.dates[1]
    assert trades[1].exit_date == bars.dates[5]

    np.testing.assert_allclose(equity["closed_pnl"], [0, 0, 0, 46, 46, 142])
    np.testing.assert_allclose(equity["mtm_pnl"], [0, -4, 96, 42, -58, 142])


def test_open_trade_is_closed_on_the_final_bar():
    bars = bars_from_closes([10.0, 11.0, 12.0, 13.0])
    trades, equity = execute([Signal(Target.LONG, 1)], bars, ExecutionConfig())
    assert len(trades) == 1
    assert trades[0].exit_date == bars.dates[-1]
    assert trades[0].profit == pytest.approx(96.0)
    assert equity["closed_pnl"].iloc[-1] == pytest.approx(96.0)


def test_no_trade_opens_on_the_final_bar():
    bars = bars_from_closes([10.0, 11.0, 12.0])
    trades, equity = execute([Signal(Target.SHORT, 2)], bars, ExecutionConfig())
    assert trades == []
    assert (equity["mtm_pnl"] == 0).all()


def test_empty_signals_give_an_empty_ledger():
    bars = bars_from_closes([10.0, 11.0, 12.0])
    trades, equity = execute([], bars, ExecutionConfig())
    assert trades == []
    assert len(equity) == 3


def test_signal_outside_series():
    with pytest.raises(InvalidArgument):
        execute([Signal(Target.LONG, 9)], bars_from_closes([10.0, 11.0]), ExecutionConfig())


def test_ledger_identity_on_a_strategy_run(noisy_bars):
    signals = run_strategy(noisy_bars, bundled_params(4), StrategyConfig())
    trades, equity = execute(signals, noisy_bars, ExecutionConfig())
    assert trades
    assert sum(t.profit for t in trades) == pytest.approx(trades[-1].cumulative_pnl)
    assert sum(t.commission for t in trades) == pytest.approx(4.0 * len(trades))
    assert equity["closed_pnl"].iloc[-1] == pytest.approx(trades[-1].cumulative_pnl)
    assert equity["mtm_pnl"].iloc[-1] == pytest.approx(trades[-1].cumulative_pnl)
    # stop-and-reverse alternates sides
    assert all(a.direction is not b.direction for a, b in zip(trades, trades[1:]))
    assert all(a.exit_date == b.entry_date for a, b in zip(trades, trades[1:]))


def test_execution_is_deterministic(es_bars):
    params = bundled_params(4)
    first = execute(run_strategy(es_bars, params), es_bars)[0]
    second = execute(run_strategy(es_bars, params), es_bars)[0]
    assert first == second


def test_replay_sample_ledger(ledger_rows):
    trades = replay_ledger(ledger_rows, ExecutionConfig(point_value=50.0, commission_round_trip=4.0))
    assert len(trades) == 48
    assert trades[0].entry_price == 2042.5
    assert trades[0].profit == pytest.approx(-454.0)
    assert trades[1].profit == pytest.approx(371.0)
    assert trades[19].profit == pytest.approx(11308.5)
    assert trades[33].profit == pytest.approx(5921.0)
    assert trades[-1].cumulative_pnl == 39558.0
    assert trades[0].days_in_position == 2
    assert trades[-1].days_in_position == 1
    assert trades[0].entry_date == date(2015, 3, 31)


def test_replay_matches_every_recorded_profit(ledger_rows, fixtures_dir):
    with (fixtures_dir / "sample_ledger.csv").open() as handle:
        recorded = [float(r["profit"]) for r in csv.DictReader(handle)]
    trades = replay_ledger(ledger_rows, ExecutionConfig(point_value=50.0, commission_round_trip=4.0))
    assert len(recorded) == len(trades) == 48
    for trade, profit in zip(trades, recorded):
        assert abs(trade.profit - profit) <= 0.5
    assert sum(recorded) == pytest.approx(39558.0)


def test_replay_chains_entries_from_previous_exits(ledger_rows):
    for previous, row in zip(ledger_rows, ledger_rows[1:]):
        assert row.entry_price == previous.exit_price
        assert row.direction is not previous.direction


def test_flipping_directions_negates_gross_pnl(ledger_rows):
    cfg = ExecutionConfig()
    flipped = [row.model_copy(update={"direction": row.direction.opposite}) for row in ledger_rows]
    for a, b in zip(replay_ledger(ledger_rows, cfg), replay_ledger(flipped, cfg)):
        assert a.profit + cfg.commission == pytest.approx(-(b.profit + cfg.commission))


def test_replay_single_flat_trade():
    rows = [LedgerRow(direction=Direction.LONG, entry_price=2000.0, exit_price=2000.0)]
    trades = replay_ledger(rows)
    assert trades[0].profit == pytest.approx(-4.0)
    assert trades[0].days_in_position == 1


def test_ledger_needs_a_first_entry_price(tmp_path):
    path = tmp_path / "ledger.csv"
    path.write_text("direction,entry_date,entry_price,exit_date,exit_price\nlong,2015-03-31,,2015-04-01,2033.5\n")
    with pytest.raises(InvalidArgument):
        load_ledger_csv(path)


def test_ledger_accepts_short_month_dates(tmp_path):
    path = tmp_path / "ledger.csv"
    path.write_text("direction,entry_date,entry_price,exit_date,exit_price\nShort,Mar-31-15,2042.5,Apr-01-15,2033.5\n")
    rows = load_ledger_csv(path)
    assert rows[0].direction is Direction.SHORT
    assert rows[0].entry_date == date(2015, 3, 31)


def test_trades_export_columns(tmp_path, ledger_rows):
    trades = replay_ledger(ledger_rows)
    frame = trades_to_frame(trades)
    assert list(frame.columns) == TRADE_COLUMNS
    assert frame.iloc[1]["Profit"] == "371.0"
    assert frame.iloc[0]["Entry price"] == "2042.50"

    path = write_trades_csv(trades, tmp_path / "trades.csv")
    with path.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 48
    assert rows[-1]["PnL"] == "39558.0"
    assert rows[-1]["Direction"] == "Short"


def test_empty_trades_export_keeps_the_header(tmp_path):
    path = write_trades_csv([], tmp_path / "trades.csv")
    assert path.read_text().strip() == ",".join(TRADE_COLUMNS)


def test_equity_export(tmp_path):
    bars = bars_from_closes([10.0, 11.0, 12.0, 13.0])
    _, equity = execute([Signal(Target.LONG, 1)], bars)
    path = write_equity_csv(equity, tmp_path / "equity.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "date,closed_pnl,mtm_pnl"
    assert lines[1].startswith(bars.dates[0].isoformat())
    assert lines[-1].endswith("96.0,96.0")


def test_ledger_rejects_an_unknown_direction(tmp_path):
    path = tmp_path / "ledger.csv"
    path.write_text("direction,entry_price,exit_price\nsideways,2000,2001\n")
    with pytest.raises(InvalidArgument, match="line 2"):
        load_ledger_csv(path)


def test_weekday_count_ignores_exchange_holidays(ledger_rows):
    trades = replay_ledger(ledger_rows)
    # Good Friday 2015 and the 2015 year-end holidays are counted as trading days
    assert trades[2].days_in_position == 5
    assert trades[33].days_in_position == 14
    assert trades[3].days_in_position == 2
