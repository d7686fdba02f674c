"""
State-space price models One to Four built from flat parameter vectors.

    One    constant-velocity price, phi = [[1, 1], [0, 1]]
    Two    local linear trend (same phi at one-bar steps, separate P0 entries)
    Three  short/long term factors, phi = [[p1, p2], [0, p3]], H = [p4, p5]
    Four   Three plus a stochastic-oscillator drift on both factors
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from core.config import settings
from core.enums import ModelKind
from core.exceptions import InsufficientHistory, InvalidArgument, InvalidParams
from filters.kalman import KalmanSpec
from integrations.market_data.bars import BarSeries

logger = structlog.get_logger(__name__)

FLAT_WINDOW_K = 50.0
BUNDLED_FILES = {
    ModelKind.ONE: "kf1.json",
    ModelKind.TWO: "kf2.json",
    ModelKind.THREE: "kf3.json",
    ModelKind.FOUR: "kf4.json",
}
STEP = 1.0  # one bar


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ModelKind
    p: tuple

    @field_validator("kind", mode="before")
    @classmethod
    def parse_kind(cls, v):
        return ModelKind.parse(v) if not isinstance(v, ModelKind) else v

    @field_validator("p", mode="before")
    @classmethod
    def parse_params(cls, v):
        # a null parameter is written "-"
        values = []
        for item in v:
            if item is None or (isinstance(item, str) and item.strip() in ("-", "")):
                values.append(0.0)
            else:
                values.append(float(item))
        return tuple(values)

    @model_validator(mode="after")
    def check_params(self) -> "ModelParams":
        expected = self.kind.param_count
        if len(self.p) != expected:
            raise InvalidParams(
                f"model {self.kind.value} takes {expected} parameters, got {len(self.p)}"
            )
        if not all(np.isfinite(self.p)):
            raise InvalidParams("parameters must be finite")
        r_index = self.kind.noise_index
        if self.p[r_index] <= 0:
            raise InvalidParams(f"p{r_index + 1} (R) must be positive, got {self.p[r_index]}")
        for i in self.kind.covariance_indices:
            if self.p[i] < 0:
                raise InvalidParams(f"p{i + 1} (initial covariance) must be non-negative")
        if self.kind is ModelKind.FOUR:
            d = self.p[14]
            if d < 1 or d != int(d):
                raise InvalidParams(f"p15 (oscillator period) must be a positive integer, got {d}")
        return self

    @property
    def period(self) -> int:
        """Oscillator lookback d for model Four, 0 otherwise"""
        return int(self.p[14]) if self.kind is ModelKind.FOUR else 0

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "ModelParams":
        try:
            payload = json.loads(data) if isinstance(data, str) else data
            return cls(kind=payload["model"], p=payload["params"])
        except json.JSONDecodeError as e:
            raise InvalidParams(f"model config is not valid JSON: {e}")
        except KeyError as e:
            raise InvalidParams(f"model config missing key {e}")
        except ValidationError as e:
            raise InvalidParams(str(e))
        except TypeError:
            raise InvalidParams('model config must be an object {"model": ..., "params": [...]}')

    def to_json(self) -> dict:
        return {"model": self.kind.value, "params": list(self.p)}


def load_model_config(path: Union[str, Path]) -> ModelParams:
    return ModelParams.from_json(Path(path).read_text(encoding="utf-8"))


def bundled_params(kind) -> ModelParams:
    """Bundled optimal parameters for one of the four models"""
    kind = ModelKind.parse(kind) if not isinstance(kind, ModelKind) else kind
    return load_model_config(settings.fixtures_path / "models" / BUNDLED_FILES[kind])


@dataclass(frozen=True)
class OscillatorContext:
    d: int
    K: float
    L: float
    Hh: float


def oscillator_k(bars: BarSeries, t: int, d: Optional[int] = None) -> OscillatorContext:
    """%K of close[t] within the lowest-low / highest-high range of the last d bars"""
    d = settings.oscillator_period if d is None else d
    if d < 1:
        raise InvalidArgument(f"oscillator period must be positive, got {d}")
    if t < d - 1 or t >= len(bars):
        raise InsufficientHistory(f"%K over {d} bars needs index in [{d - 1}, {len(bars) - 1}], got {t}")
    window = bars.bars[t - d + 1: t + 1]
    low = min(b.low for b in window)
    high = max(b.high for b in window)
    close = bars.bars[t].close
    if high == low:
        k = FLAT_WINDOW_K
    else:
        k = 100.0 * (close - low) / (high - low)
    return OscillatorContext(d=d, K=float(np.clip(k, 0.0, 100.0)), L=low, Hh=high)


def oscillator_series(bars: BarSeries, d: int) -> np.ndarray:
    """%K for every bar; NaN where fewer than d bars are available"""
    frame = pd.DataFrame({"high": bars.highs, "low": bars.lows, "close": bars.closes})
    lowest = frame["low"].rolling(d, min_periods=d).min()
    highest = frame["high"].rolling(d, min_periods=d).max()
    span = highest - lowest
    k = 100.0 * (frame["close"] - lowest) / span.where(span != 0)
    k = k.where(span != 0, FLAT_WINDOW_K).where(span.notna())
    return k.clip(0.0, 100.0).to_numpy()


def _outer_noise(a: float, b: float) -> np.ndarray:
    v = np.array([a, b])
    return np.outer(v, v)


def _speed_start(closes: np.ndarray) -> np.ndarray:
    # speed starts as the difference of the first two prices
    speed = closes[1] - closes[0] if closes.size > 1 else 0.0
    return np.array([closes[0], speed])


def _least_norm_start(H: np.ndarray, y0: float) -> np.ndarray:
    norm = float(H @ H)
    if norm == 0:
        raise InvalidParams("measurement vector H is zero; initial state undefined")
    return H * y0 / norm


def _require_kind(params: ModelParams, kind: ModelKind) -> None:
    if params.kind is not kind:
        raise InvalidParams(f"expected model {kind.value}, got {params.kind.value}")


def _closes(bars: BarSeries) -> np.ndarray:
    closes = bars.closes
    if closes.size == 0:
        raise InsufficientHistory("empty bar series")
    return closes


def build_model1(params: ModelParams, bars: BarSeries) -> KalmanSpec:
    _require_kind(params, ModelKind.ONE)
    p = params.p
    return KalmanSpec(
        phi=np.array([[1.0, STEP], [0.0, 1.0]]),
        H=np.array([1.0, 0.0]),
        Q=_outer_noise(p[0], p[1]),
        R=p[2],
        P0=np.diag([p[3], p[3]]),
        x0=_speed_start(_closes(bars)),
    )


def build_model2(params: ModelParams, bars: BarSeries) -> KalmanSpec:
    _require_kind(params, ModelKind.TWO)
    p = params.p
    return KalmanSpec(
        phi=np.array([[1.0, 1.0], [0.0, 1.0]]),
        H=np.array([1.0, 0.0]),
        Q=_outer_noise(p[0], p[1]),
        R=p[2],
        P0=np.diag([p[3], p[4]]),
        x0=_speed_start(_closes(bars)),
    )


def _two_factor(p, bars: BarSeries, state_drift=None) -> KalmanSpec:
    H = np.array([p[3], p[4]])
    return KalmanSpec(
        phi=np.array([[p[0], p[1]], [0.0, p[2]]]),
        H=H,
        Q=_outer_noise(p[5], p[6]),
        R=p[7],
        P0=np.diag([p[8], p[9]]),
        x0=_least_norm_start(H, _closes(bars)[0]),
        state_drift=state_drift,
    )


def build_model3(params: ModelParams, bars: BarSeries) -> KalmanSpec:
    _require_kind(params, ModelKind.THREE)
    return _two_factor(params.p, bars)


class OscillatorDrift:
    """c_t = (p11 - p12*K_t, p13 - p14*K_t) with K_t = %K / 100.

    Zero until d bars of history exist.
    """

    def __init__(self, bars: BarSeries, m1: float, n1: float, m2: float, n2: float, d: int):
        self.d = d
        k = oscillator_series(bars, d) / 100.0
        drift = np.column_stack([m1 - n1 * k, m2 - n2 * k])
        self._drift = np.nan_to_num(drift, nan=0.0)
        self._zero = np.zeros(2)

    def __call__(self, t: int) -> np.ndarray:
        if t < self.d - 1 or t >= len(self._drift):
            return self._zero
        return self._drift[t]


def build_model4(params: ModelParams, bars: BarSeries) -> KalmanSpec:
    _require_kind(params, ModelKind.FOUR)
    p = params.p
    d = params.period
    if len(bars) <= d:
        raise InsufficientHistory(f"model four needs more than {d} bars, got {len(bars)}")
    drift = OscillatorDrift(bars, m1=p[10], n1=p[11], m2=p[12], n2=p[13], d=d)
    return _two_factor(p, bars, state_drift=drift)


BUILDERS = {
    ModelKind.ONE: build_model1,
    ModelKind.TWO: build_model2,
    ModelKind.THREE: build_model3,
    ModelKind.FOUR: build_model4,
}


def build_spec(params: ModelParams, bars: BarSeries) -> KalmanSpec:
    return BUILDERS[params.kind](params, bars)
