import numpy as np
import pytest

from core.enums import ModelKind
from core.exceptions import InsufficientHistory, InvalidArgument, InvalidParams
from filters.kalman import filter_series, is_psd
from filters.models import (
    ModelParams,
    OscillatorDrift,
    build_model1,
    build_model3,
    build_model4,
    build_spec,
    load_model_config,
    oscillator_k,
    oscillator_series,
    bundled_params,
)
from integrations.market_data import synthesize

from conftest import bars_from_closes

KF3 = [1.0, 0.4, 1.2, 1.0, 1.0, 0.8, 0.4, 0.7, 1.0, 0.4]


def test_bundled_params():
    kf1 = bundled_params(ModelKind.ONE)
    kf4 = bundled_params("kf4")
    assert kf1.p == (5.0, 5.0, 45.0, 10.0)
    assert bundled_params(2).p == (5.0, 5.0, 41.0, 1.0, 1.0)
    assert list(bundled_params("three").p) == KF3
    assert kf4.p[:10] == tuple(KF3)
    # written as "-"
    assert kf4.p[13] == 0.0
    assert kf4.period == 5


def test_model_config_json(tmp_path):
    path = tmp_path / "kf.json"
    path.write_text('{"model": "two", "params": [1, 2, 3, 4, 5]}')
    params = load_model_config(path)
    assert params.kind is ModelKind.TWO
    assert ModelParams.from_json(params.to_json()) == params


@pytest.mark.parametrize(
    "payload",
    [
        {"model": "one", "params": [5, 5, 45]},
        {"model": "one", "params": [5, 5, 0, 10]},
        {"model": "two", "params": [5, 5, 41, -1, 1]},
        {"model": "four", "params": KF3 + [0.5, 0.9, 0.5, 0, 2.5]},
        {"model": "four", "params": KF3 + [0.5, 0.9, 0.5, 0, 0]},
        {"model": "seven", "params": [1]},
        {"params": [1, 2, 3, 4]},
        "{not json",
        "[1, 2]",
        "42",
    ],
)
def test_invalid_model_configs(payload):
    with pytest.raises(InvalidParams):
        ModelParams.from_json(payload)


def test_model1_layout():
    bars = bars_from_closes([2000.0, 2003.0, 2001.0])
    spec = build_model1(bundled_params(1), bars)
    np.testing.assert_array_equal(spec.phi, [[1.0, 1.0], [0.0, 1.0]])
    np.testing.assert_array_equal(spec.H, [1.0, 0.0])
    np.testing.assert_array_equal(spec.Q, [[25.0, 25.0], [25.0, 25.0]])
    assert spec.R == 45.0
    np.testing.assert_array_equal(spec.P0, np.diag([10.0, 10.0]))
    np.testing.assert_array_equal(spec.x0, [2000.0, 3.0])


def test_model1_constant_series_starts_still():
    spec = build_model1(bundled_params(1), bars_from_closes([1500.0] * 5))
    np.testing.assert_array_equal(spec.x0, [1500.0, 0.0])


def test_model3_least_norm_start():
    params = ModelParams(kind="three", p=[1, 0, 1, 1, 1, 1, 1, 1, 1, 1])
    spec = build_model3(params, bars_from_closes([2000.0, 2001.0]))
    np.testing.assert_allclose(spec.x0, [1000.0, 1000.0])
    np.testing.assert_allclose(spec.H @ spec.x0, 2000.0)


def test_model3_rejects_zero_measurement_vector():
    params = ModelParams(kind="three", p=[1, 0, 1, 0, 0, 1, 1, 1, 1, 1])
    with pytest.raises(InvalidParams):
        build_model3(params, bars_from_closes([2000.0, 2001.0]))


def test_builder_checks_model_kind():
    with pytest.raises(InvalidParams):
        build_model1(bundled_params(2), bars_from_closes([1.0, 2.0]))


def test_model_two_with_equal_covariances_is_model_one(noisy_bars):
    one = ModelParams(kind="one", p=[5, 5, 45, 10])
    two = ModelParams(kind="two", p=[5, 5, 45, 10, 10])
    run1 = filter_series(build_spec(one, noisy_bars), noisy_bars.closes)
    run2 = filter_series(build_spec(two, noisy_bars), noisy_bars.closes)
    assert np.abs(run1.predicted - run2.predicted).max() < 1e-12
    assert np.abs(run1.corrected - run2.corrected).max() < 1e-12


def test_model_four_without_drift_is_model_three(noisy_bars):
    three = ModelParams(kind="three", p=KF3)
    four = ModelParams(kind="four", p=KF3 + [0, 0, 0, 0, 5])
    run3 = filter_series(build_spec(three, noisy_bars), noisy_bars.closes)
    run4 = filter_series(build_spec(four, noisy_bars), noisy_bars.closes)
    assert np.abs(run3.predicted - run4.predicted).max() < 1e-12
    assert np.abs(run3.corrected - run4.corrected).max() < 1e-12


def test_model_three_with_identity_layout_is_model_two():
    closes = 2000.0 + np.concatenate([[0.0, 0.0], np.cumsum(np.random.default_rng(5).normal(size=98))])
    bars = bars_from_closes(closes)
    two = ModelParams(kind="two", p=[0.8, 0.4, 0.7, 1.0, 0.4])
    three = ModelParams(kind="three", p=[1, 1, 1, 1, 0, 0.8, 0.4, 0.7, 1.0, 0.4])
    run2 = filter_series(build_spec(two, bars), closes)
    run3 = filter_series(build_spec(three, bars), closes)
    np.testing.assert_allclose(run3.predicted, run2.predicted, atol=1e-9)


def test_oscillator_extremes():
    closes = [10.0, 11.0, 12.0, 13.0, 14.0]
    bars = bars_from_closes(closes, spread=0.0)
    top = oscillator_k(bars, 4, 3)
    assert top.K == 100.0
    assert top.Hh == 14.0

    falling = bars_from_closes(closes[::-1], spread=0.0)
    assert oscillator_k(falling, 4, 3).K == 0.0

    flat = bars_from_closes([20.0] * 6, spread=0.0)
    assert oscillator_k(flat, 5, 4).K == 50.0


def test_oscillator_needs_history():
    bars = bars_from_closes([10.0, 11.0, 12.0])
    with pytest.raises(InsufficientHistory):
        oscillator_k(bars, 1, 3)
    with pytest.raises(InvalidArgument):
        oscillator_k(bars, 2, 0)


def test_oscillator_period_defaults_to_fourteen(noisy_bars):
    assert oscillator_k(noisy_bars, 20).d == 14
    with pytest.raises(InsufficientHistory):
        oscillator_k(noisy_bars, 12)


@pytest.mark.parametrize("seed", range(5))
def test_oscillator_stays_in_range_and_matches_series(seed):
    bars = synthesize("random-walk", n=200, seed=seed, noise=6.0)
    d = 3 + seed
    series = oscillator_series(bars, d)
    assert np.isnan(series[: d - 1]).all()
    for t in range(d - 1, len(bars)):
        k = oscillator_k(bars, t, d).K
        assert 0.0 <= k <= 100.0
        assert series[t] == pytest.approx(k)


def test_oscillator_drift_is_zero_before_the_window_fills():
    bars = synthesize("trend", n=40, seed=0, noise=2.0)
    drift = OscillatorDrift(bars, m1=0.5, n1=0.9, m2=0.5, n2=0.0, d=5)
    np.testing.assert_array_equal(drift(-1), [0.0, 0.0])
    np.testing.assert_array_equal(drift(3), [0.0, 0.0])
    k = oscillator_k(bars, 10, 5).K / 100.0
    np.testing.assert_allclose(drift(10), [0.5 - 0.9 * k, 0.5])


def test_model_four_needs_more_bars_than_its_period():
    params = bundled_params(4)
    with pytest.raises(InsufficientHistory):
        build_model4(params, bars_from_closes([10.0, 11.0, 12.0, 13.0, 14.0]))


def test_model_four_drift_moves_predictions(noisy_bars):
    three = filter_series(build_spec(bundled_params(3), noisy_bars), noisy_bars.closes)
    four = filter_series(build_spec(bundled_params(4), noisy_bars), noisy_bars.closes)
    np.testing.assert_allclose(four.predicted[:5], three.predicted[:5])
    assert np.abs(four.predicted - three.predicted).max() > 1e-6


@pytest.mark.parametrize("kind", list(ModelKind))
def test_process_covariance_is_psd(kind, noisy_bars):
    rng = np.random.default_rng(21)
    base = list(bundled_params(kind).p)
    noise = (0, 1) if kind in (ModelKind.ONE, ModelKind.TWO) else (5, 6)
    assert is_psd(build_spec(bundled_params(kind), noisy_bars).Q)
    for _ in range(50):
        p = list(base)
        for i in noise:
            p[i] = float(rng.normal(0.0, 20.0))
        spec = build_spec(ModelParams(kind=kind, p=p), noisy_bars)
        assert is_psd(spec.Q)


@pytest.mark.parametrize("seed", range(3))
def test_model_four_drift_is_bounded_by_its_coefficients(seed):
    rng = np.random.default_rng(seed)
    bars = synthesize("random-walk", n=250, seed=seed, noise=8.0)
    p = list(bundled_params(4).p)
    p[10:14] = rng.normal(0.0, 3.0, size=4).tolist()
    spec = build_spec(ModelParams(kind=ModelKind.FOUR, p=p), bars)
    first = abs(p[10]) + abs(p[11])
    second = abs(p[12]) + abs(p[13])
    for t in range(-1, len(bars)):
        c = spec.drift(t)
        assert abs(c[0]) <= first + 1e-12
        assert abs(c[1]) <= second + 1e-12
