"""
Linear-Gaussian Kalman filter with a scalar measurement.

    X_{t+1} = phi X_t + c_t + w_t,   w_t ~ N(0, Q)
    Y_t     = H X_t + d_t + v_t,     v_t ~ N(0, R)

FilterState.step is the index of the last measurement folded in; the
initial state has step -1. predict() uses the drift c_step, so the
prediction of measurement t only sees information up to t-1.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import structlog

from core.exceptions import DimensionMismatch, InvalidArgument, InvalidParams, SingularResidual

logger = structlog.get_logger(__name__)

SYMMETRY_TOLERANCE = 1e-10
MIN_RESIDUAL_VARIANCE = 1e-300


def _zero_state_drift(n: int) -> Callable[[int], np.ndarray]:
    zeros = np.zeros(n)
    return lambda t: zeros


def _zero_measurement_drift(t: int) -> float:
    return 0.0


def is_psd(matrix: np.ndarray, tolerance: float = SYMMETRY_TOLERANCE) -> bool:
    # tolerance scales with the matrix magnitude
    scale = max(1.0, float(np.abs(matrix).max()))
    if not np.allclose(matrix, matrix.T, atol=tolerance * scale, rtol=0.0):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (matrix + matrix.T)).min() >= -tolerance * scale)


@dataclass(frozen=True)
class KalmanSpec:
    phi: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: float
    x0: np.ndarray
    P0: np.ndarray
    state_drift: Optional[Callable[[int], np.ndarray]] = None
    measurement_drift: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        H = np.asarray(self.H, dtype=float).ravel()
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        x0 = np.asarray(self.x0, dtype=float).ravel()
        P0 = np.atleast_2d(np.asarray(self.P0, dtype=float))
        n = x0.size

        if phi.shape != (n, n) or Q.shape != (n, n) or P0.shape != (n, n) or H.size != n:
            raise DimensionMismatch(
                f"state dimension {n}: phi {phi.shape}, H {H.shape}, Q {Q.shape}, P0 {P0.shape}"
            )
        if not np.isfinite(self.R) or self.R <= 0:
            raise InvalidParams(f"measurement variance R must be positive, got {self.R}")
        if not is_psd(Q):
            raise InvalidParams("process covariance Q must be symmetric positive semidefinite")
        if not is_psd(P0):
            raise InvalidParams("initial covariance P0 must be symmetric positive semidefinite")

        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "P0", P0)
        if self.state_drift is None:
            object.__setattr__(self, "state_drift", _zero_state_drift(n))
        if self.measurement_drift is None:
            object.__setattr__(self, "measurement_drift", _zero_measurement_drift)

    @property
    def dim(self) -> int:
        return self.x0.size

    def initial_state(self) -> "FilterState":
        return FilterState(x=self.x0.copy(), P=self.P0.copy(), step=-1)

    def drift(self, t: int) -> np.ndarray:
        c = np.asarray(self.state_drift(t), dtype=float).ravel()
        if c.size != self.dim:
            raise DimensionMismatch(f"state drift has size {c.size}, expected {self.dim}")
        return c


@dataclass(frozen=True)
class FilterState:
    """X_{t|t} and P_{t|t} after predict+update, or X_{t+1|t}, P_{t+1|t} after predict"""

    x: np.ndarray
    P: np.ndarray
    step: int = -1


@dataclass(frozen=True)
class StepOutput:
    predicted_measurement: float
    corrected_measurement: float
    innovation: float
    residual_variance: float
    gain: np.ndarray


@dataclass
class FilterRun:
    predicted: np.ndarray
    corrected: np.ndarray
    gains: np.ndarray
    innovations: np.ndarray
    residual_variances: np.ndarray
    forecast: float
    warmup: int
    final_state: FilterState = field(repr=False, default=None)

    def pairs(self) -> np.ndarray:
        """(predicted, corrected) per measurement as an (n, 2) array"""
        return np.column_stack([self.predicted, self.corrected])


def _check_state(state: FilterState, spec: KalmanSpec) -> None:
    n = spec.dim
    if state.x.shape != (n,) or state.P.shape != (n, n):
        raise DimensionMismatch(
            f"state x {state.x.shape}, P {state.P.shape} incompatible with dimension {n}"
        )


def predict(state: FilterState, spec: KalmanSpec) -> FilterState:
    """x' = phi x + c_t, P' = phi P phi^T + Q; the step is unchanged"""
    _check_state(state, spec)
    x = spec.phi @ state.x + spec.drift(state.step)
    P = spec.phi @ state.P @ spec.phi.T + spec.Q
    return FilterState(x=x, P=0.5 * (P + P.T), step=state.step)


def predicted_measurement(state: FilterState, spec: KalmanSpec) -> float:
    return float(spec.H @ state.x + spec.measurement_drift(state.step))


def update(state: FilterState, spec: KalmanSpec, y: float) -> Tuple[FilterState, StepOutput]:
    """Fold measurement y into a predicted state"""
    _check_state(state, spec)
    H = spec.H
    d = spec.measurement_drift(state.step)

    y_hat = float(H @ state.x + d)
    innovation = float(y) - y_hat
    PHt = state.P @ H
    S = float(H @ PHt + spec.R)
    if not S > MIN_RESIDUAL_VARIANCE:
        raise SingularResidual(f"residual variance {S} is not positive at step {state.step + 1}")

    K = PHt / S
    x = state.x + K * innovation
    P = (np.eye(spec.dim) - np.outer(K, H)) @ state.P
    P = 0.5 * (P + P.T)

    new_state = FilterState(x=x, P=P, step=state.step + 1)
    output = StepOutput(
        predicted_measurement=y_hat,
        corrected_measurement=float(H @ x + d),
        innovation=innovation,
        residual_variance=S,
        gain=K,
    )
    return new_state, output


def joseph_update(P: np.ndarray, H: np.ndarray, R: float) -> np.ndarray:
    """(I-KH) P (I-KH)^T + K R K^T for the same gain"""
    H = np.asarray(H, dtype=float).ravel()
    S = float(H @ P @ H + R)
    K = P @ H / S
    A = np.eye(P.shape[0]) - np.outer(K, H)
    return A @ P @ A.T + R * np.outer(K, K)


def filter_series(spec: KalmanSpec, measurements, warmup: int = 0) -> FilterRun:
    """Run the filter over a whole series.

    For i < warmup both outputs copy the measurement while the filter still
    runs; afterwards predicted[i] is the prediction made before measurement i
    and corrected[i] the estimate after it.
    """
    y = np.asarray(measurements, dtype=float).ravel()
    if y.size == 0:
        raise InvalidArgument("measurements must be non-empty")
    if warmup < 0:
        raise InvalidArgument(f"warmup must be non-negative, got {warmup}")

    n = y.size
    predicted = np.empty(n)
    corrected = np.empty(n)
    innovations = np.empty(n)
    variances = np.empty(n)
    gains = np.empty((n, spec.dim))

    state = spec.initial_state()
    for i in range(n):
        state = predict(state, spec)
        state, out = update(state, spec, y[i])
        if i < warmup:
            predicted[i] = y[i]
            corrected[i] = y[i]
        else:
            predicted[i] = out.predicted_measurement
            corrected[i] = out.corrected_measurement
        innovations[i] = out.innovation
        variances[i] = out.residual_variance
        gains[i] = out.gain

    forecast = predicted_measurement(predict(state, spec), spec)
    logger.debug("series filtered", n=n, warmup=warmup, final_gain=gains[-1].tolist())
    return FilterRun(
        predicted=predicted,
        corrected=corrected,
        gains=gains,
        innovations=innovations,
        residual_variances=variances,
        forecast=forecast,
        warmup=warmup,
        final_state=state,
    )
