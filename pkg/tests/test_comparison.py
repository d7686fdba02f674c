import pytest

from core.enums import ModelKind
from core.exceptions import InvalidArgument
from filters.models import bundled_params
from services.backtest import ExecutionConfig, execute
from services.comparison import COMPARISON_COLUMNS, ComparisonService
from services.reports import compute_report
from services.strategy import StrategyConfig, run_strategy


@pytest.fixture
def all_models():
    return [bundled_params(kind) for kind in ModelKind]


def test_summary_matches_single_backtests(es_bars, all_models):
    service = ComparisonService()
    outcomes = service.run(es_bars, all_models)
    frame = service.summary_frame(outcomes)

    assert list(frame.columns) == COMPARISON_COLUMNS
    assert list(frame["model"]) == ["one", "two", "three", "four"]
    for params, (_, row) in zip(all_models, frame.iterrows()):
        trades, equity = execute(run_strategy(es_bars, params), es_bars)
        if not trades:
            assert row["num_trades"] == 0
            continue
        report = compute_report(trades, equity)
        assert row["net_profit"] == pytest.approx(report.all.net_profit)
        assert row["drawdown"] == pytest.approx(report.all.drawdown)
        assert row["num_trades"] == report.all.num_trades


def test_shared_execution_settings_apply_to_every_model(es_bars, all_models):
    cheap = ComparisonService(execution=ExecutionConfig(commission_round_trip=0.0))
    dear = ComparisonService(execution=ExecutionConfig(commission_round_trip=10.0))
    for a, b in zip(cheap.run(es_bars, all_models), dear.run(es_bars, all_models)):
        assert len(a.trades) == len(b.trades)
        if a.trades:
            assert a.report.all.net_profit - b.report.all.net_profit == pytest.approx(10.0 * len(a.trades))


def test_model_without_trades_keeps_a_zero_row(es_bars):
    service = ComparisonService(strategy=StrategyConfig(offset=1e9))
    outcomes = service.run(es_bars, [bundled_params(1)])
    row = service.summary_row(outcomes[0])
    assert outcomes[0].report is None
    assert row["model"] == "one"
    assert row["num_trades"] == 0
    assert row["net_profit"] == 0.0


def test_monthly_frame_has_one_column_per_model(es_bars, all_models):
    service = ComparisonService()
    outcomes = service.run(es_bars, all_models)
    monthly = service.monthly_frame(outcomes)
    assert list(monthly.columns) == ["month", "one", "two", "three", "four"]
    assert monthly["month"].iloc[0] == "2015-03"
    for outcome in outcomes:
        assert monthly[outcome.label].sum() == pytest.approx(outcome.equity["mtm_pnl"].iloc[-1])


def test_compare_needs_distinct_models(es_bars):
    service = ComparisonService()
    with pytest.raises(InvalidArgument):
        service.run(es_bars, [])
    with pytest.raises(InvalidArgument):
        service.run(es_bars, [bundled_params(2), bundled_params("kf2")])
