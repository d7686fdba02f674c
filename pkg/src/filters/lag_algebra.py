"""
Weighted moving averages and their lag algebra.

Weights are indexed by age: w[0] applies to the newest price, w[i] to the
price i bars back. The lag of a weight vector is its weighted mean age.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import structlog

from core.config import settings
from core.enums import Indicator
from core.exceptions import InvalidArgument, SeriesTooShort, ZeroWeightSum

logger = structlog.get_logger(__name__)

UNIT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise InvalidArgument("weights must be finite and non-empty")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def is_normalized(self) -> bool:
        return abs(self.total - 1.0) <= UNIT_SUM_TOLERANCE

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(length)
        out[: len(self)] = self.weights
        return out


@dataclass(frozen=True)
class LinearCombination:
    """a·MA + b·MA∘2 + c·MA∘3"""

    a: float
    b: float
    c: float = 0.0

    @property
    def coefficients(self) -> tuple:
        return (self.a, self.b, self.c)

    @property
    def order(self) -> int:
        return 3 if self.c != 0 else 2


DEMA_COMBINATION = LinearCombination(2.0, -1.0)
TEMA_COMBINATION = LinearCombination(3.0, -3.0, 1.0)


def as_weights(w: Union[WeightVector, Sequence[float]]) -> WeightVector:
    return w if isinstance(w, WeightVector) else WeightVector(np.asarray(w, dtype=float))


def normalize(w) -> WeightVector:
    w = as_weights(w)
    total = w.total
    if total == 0:
        raise ZeroWeightSum("cannot normalize weights summing to zero")
    return WeightVector(w.weights / total, w.step)


def lag(w) -> float:
    """Weighted mean age in bars: sum(w_i * i * step) / sum(w_i)"""
    w = as_weights(w)
    total = w.total
    if total == 0:
        raise ZeroWeightSum("lag undefined for weights summing to zero")
    ages = np.arange(len(w), dtype=float) * w.step
    return float(np.dot(w.weights, ages) / total)


def compose(w, k: int) -> WeightVector:
    """Weights of MA applied k times: the k-fold self-convolution of w"""
    w = as_weights(w)
    if int(k) != k or k < 1:
        raise InvalidArgument(f"composition order must be a positive integer, got {k}")
    out = w.weights
    for _ in range(int(k) - 1):
        out = np.convolve(out, w.weights)
    return WeightVector(out, w.step)


def sma(period: int) -> WeightVector:
    if period < 1:
        raise InvalidArgument(f"period must be at least 1, got {period}")
    return WeightVector(np.full(int(period), 1.0 / period))


def ema_alpha(period: int) -> float:
    return 2.0 / (period + 1.0)


def ema(period: int, tail_mass: Optional[float] = None) -> WeightVector:
    """Geometric weights truncated once the omitted tail is below tail_mass, renormalized"""
    if period < 1:
        raise InvalidArgument(f"period must be at least 1, got {period}")
    tail_mass = settings.ema_tail_mass if tail_mass is None else tail_mass
    alpha = ema_alpha(period)
    decay = 1.0 - alpha
    if decay == 0.0:
        return WeightVector(np.array([1.0]))
    # omitted tail after n weights is decay**n
    length = max(1, int(np.ceil(np.log(tail_mass) / np.log(decay))))
    while decay ** length >= tail_mass:
        length += 1
    raw = alpha * decay ** np.arange(length, dtype=float)
    return normalize(raw)


def warmup_length(w) -> int:
    return len(as_weights(w)) - 1


def weighted_ma(prices, w) -> np.ndarray:
    """out[t] = sum_i w_i * price[t-i]; the first len(w)-1 slots copy the raw price"""
    w = as_weights(w)
    prices = np.asarray(prices, dtype=float)
    if prices.size < len(w):
        raise SeriesTooShort(f"need at least {len(w)} prices, got {prices.size}")
    out = prices.copy()
    full = np.convolve(prices, w.weights, mode="full")
    start = len(w) - 1
    out[start:] = full[start: prices.size]
    return out


def combined_weights(combo: LinearCombination, w) -> WeightVector:
    """Expanded weights of a·MA + b·MA∘2 + c·MA∘3, zero padded to a common length"""
    w = as_weights(w)
    terms = [(coef, compose(w, k)) for k, coef in enumerate(combo.coefficients, start=1) if coef != 0]
    length = max(len(t) for _, t in terms)
    total = sum(coef * t.padded(length) for coef, t in terms)
    return WeightVector(total, w.step)


def ema_recursive(prices, period: int) -> np.ndarray:
    """e_t = alpha*p_t + (1-alpha)*e_{t-1}, seeded with the first price"""
    prices = np.asarray(prices, dtype=float)
    alpha = ema_alpha(period)
    out = np.empty_like(prices)
    if prices.size == 0:
        return out
    out[0] = prices[0]
    for t in range(1, prices.size):
        out[t] = out[t - 1] + alpha * (prices[t] - out[t - 1])
    return out


def _zero_lag(prices, period: int, combo: LinearCombination) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    base = ema(period)
    if prices.size < len(base):
        raise SeriesTooShort(f"need at least {len(base)} prices, got {prices.size}")

    first = ema_recursive(prices, period)
    layers = [first]
    for _ in range(1, combo.order):
        layers.append(ema_recursive(layers[-1], period))
    combined = sum(coef * layer for coef, layer in zip(combo.coefficients, layers))

    out = prices.copy()
    start = warmup_length(base)
    out[start:] = combined[start:]
    return out


def dema(prices, period: int) -> np.ndarray:
    """2·EMA − EMA∘2"""
    return _zero_lag(prices, period, DEMA_COMBINATION)


def tema(prices, period: int) -> np.ndarray:
    """3·EMA − 3·EMA∘2 + EMA∘3"""
    return _zero_lag(prices, period, TEMA_COMBINATION)


def solve_zero_lag(order: int) -> LinearCombination:
    """Coefficients with unit sum and zero combined lag (order 3 also fixes c = 1).

    lag(MA∘k) = k·lag(MA), so zero lag reads a + 2b + 3c = 0.
    """
    if order == 2:
        system = np.array([[1.0, 1.0], [1.0, 2.0]])
        rhs = np.array([1.0, 0.0])
    elif order == 3:
        system = np.array([[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [0.0, 0.0, 1.0]])
        rhs = np.array([1.0, 0.0, 1.0])
    else:
        raise InvalidArgument(f"order must be 2 or 3, got {order}")
    solution = np.linalg.solve(system, rhs)
    return LinearCombination(*[float(x) for x in solution])


def smooth(prices, indicator, period: Optional[int] = None) -> np.ndarray:
    """Moving-average indicator by name"""
    indicator = Indicator(indicator)
    period = settings.default_ma_period if period is None else period
    if indicator is Indicator.SMA:
        return weighted_ma(prices, sma(period))
    if indicator is Indicator.EMA:
        return weighted_ma(prices, ema(period))
    if indicator is Indicator.DEMA:
        return dema(prices, period)
    if indicator is Indicator.TEMA:
        return tema(prices, period)
    raise InvalidArgument(f"{indicator.value} is not a moving-average indicator")


def indicator_warmup(indicator, period: Optional[int] = None) -> int:
    """Number of leading bars copied from the raw price"""
    indicator = Indicator(indicator)
    period = settings.default_ma_period if period is None else period
    if indicator is Indicator.SMA:
        return warmup_length(sma(period))
    return warmup_length(ema(period))
