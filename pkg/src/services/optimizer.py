"""
Parameter search for the Kalman models.

Phase one walks a coarse grid (itertools.product, first dimension slowest) or,
when no grid is given, a seeded Latin hypercube. Phase two runs Nelder-Mead
from the best point over the continuous, non-degenerate dimensions. Every
request goes through one budgeted evaluator, so for a fixed seed the trace
of a smaller budget is a prefix of the trace of a larger one.
"""

import itertools
import json
import math
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy import optimize as so
from scipy.stats import qmc

from core.config import settings
from core.enums import ModelKind, Objective
from core.exceptions import InvalidParams, InvalidSpace, KalmanTrendError
from filters.models import ModelParams
from integrations.market_data.bars import BarSeries
from services.backtest import ExecutionConfig, execute
from services.reports import compute_report, json_safe
from services.strategy import StrategyConfig, run_strategy

logger = structlog.get_logger(__name__)

MIN_NOISE = 1e-9
FAILED = -math.inf
# what the minimizer sees for a failed point
FAILED_PENALTY = 1e300
SIMPLEX_STEP = 0.1
REFINE_MAXFEV = 100_000


class SearchSpace(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ModelKind
    bounds: Tuple[Tuple[float, float], ...]
    grid: Optional[Tuple[int, ...]] = None
    integer_dims: Optional[Tuple[int, ...]] = None
    objective: Objective = Objective.NET_PROFIT
    budget: Optional[int] = None
    seed: Optional[int] = None

    @field_validator("kind", mode="before")
    @classmethod
    def parse_kind(cls, v):
        return ModelKind.parse(v) if not isinstance(v, ModelKind) else v

    @model_validator(mode="after")
    def check_space(self) -> "SearchSpace":
        n = self.kind.param_count
        if len(self.bounds) != n:
            raise InvalidSpace(f"model {self.kind.value} needs {n} bounds, got {len(self.bounds)}")
        for i, (lo, hi) in enumerate(self.bounds):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise InvalidSpace(f"bounds of p{i + 1} must be finite")
            if lo > hi:
                raise InvalidSpace(f"bounds of p{i + 1} are reversed: [{lo}, {hi}]")
        if self.grid is not None:
            if len(self.grid) != n:
                raise InvalidSpace(f"grid needs {n} entries, got {len(self.grid)}")
            if any(g < 1 for g in self.grid):
                raise InvalidSpace("grid point counts must be at least 1")
        for i in self.integers:
            if not 0 <= i < n:
                raise InvalidSpace(f"integer dimension {i} outside 0..{n - 1}")
        if self.budget is not None and self.budget < 1:
            raise InvalidSpace("budget must be at least 1")
        return self

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def integers(self) -> Tuple[int, ...]:
        """Integer dimensions; p15 (oscillator period) for model Four by default"""
        if self.integer_dims is not None:
            return self.integer_dims
        return (14,) if self.kind is ModelKind.FOUR else ()

    def clamped(self) -> "SearchSpace":
        """Bounds pulled inside the region where ModelParams is valid"""
        bounds = [list(b) for b in self.bounds]
        r = self.kind.noise_index
        bounds[r][0] = max(bounds[r][0], MIN_NOISE)
        for i in self.kind.covariance_indices:
            bounds[i][0] = max(bounds[i][0], 0.0)
        for i in self.integers:
            bounds[i][0] = math.ceil(bounds[i][0])
            bounds[i][1] = math.floor(bounds[i][1])
        if self.kind is ModelKind.FOUR:
            bounds[14][0] = max(bounds[14][0], 1)
        for i, (lo, hi) in enumerate(bounds):
            if lo > hi:
                raise InvalidSpace(f"p{i + 1} has no admissible value in [{self.bounds[i][0]}, {self.bounds[i][1]}]")
        return self.model_copy(update={"bounds": tuple(tuple(b) for b in bounds)})

    def axis(self, i: int) -> np.ndarray:
        lo, hi = self.bounds[i]
        count = self.grid[i] if self.grid is not None else 1
        if lo == hi:
            values = np.array([lo])
        elif count == 1:
            values = np.array([(lo + hi) / 2.0])
        else:
            values = np.linspace(lo, hi, count)
        if i in self.integers:
            values = np.unique(np.round(values))
        return values

    @classmethod
    def point(cls, params: ModelParams, **kwargs) -> "SearchSpace":
        """Degenerate space holding exactly one parameter vector"""
        return cls(
            kind=params.kind,
            bounds=tuple((v, v) for v in params.p),
            grid=tuple(1 for _ in params.p),
            **kwargs,
        )

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "SearchSpace":
        try:
            payload = json.loads(data) if isinstance(data, str) else data
            return cls(
                kind=payload["model"],
                bounds=payload["bounds"],
                grid=payload.get("grid"),
                integer_dims=payload.get("integer_dims"),
                objective=payload.get("objective", Objective.NET_PROFIT),
                budget=payload.get("budget"),
                seed=payload.get("seed"),
            )
        except json.JSONDecodeError as e:
            raise InvalidSpace(f"search space is not valid JSON: {e}")
        except KeyError as e:
            raise InvalidSpace(f"search space missing key {e}")
        except ValueError as e:
            raise InvalidSpace(str(e))
        except (TypeError, AttributeError):
            raise InvalidSpace('search space must be an object {"model": ..., "bounds": [...]}')

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SearchSpace":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


class TraceEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: Tuple[float, ...]
    objective: float
    phase: str


class OptimizationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    best_params: ModelParams
    best_objective: float
    evaluations: int
    trace: List[TraceEntry]
    objective: Objective
    seed: int
    budget: int

    def to_json(self, indent: int = 2) -> str:
        payload = {
            "model": self.best_params.kind.value,
            "params": list(self.best_params.p),
            "objective": self.objective.value,
            "best_objective": self.best_objective,
            "evaluations": self.evaluations,
            "budget": self.budget,
            "seed": self.seed,
        }
        return json.dumps(json_safe(payload), indent=indent)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    """Scores parameter vectors, caches repeats and enforces the budget"""

    def __init__(
        self,
        bars: BarSeries,
        kind: ModelKind,
        objective: Objective,
        budget: int,
        strategy_cfg: StrategyConfig,
        exec_cfg: ExecutionConfig,
    ):
        self.bars = bars
        self.kind = kind
        self.objective = objective
        self.budget = budget
        self.strategy_cfg = strategy_cfg
        self.exec_cfg = exec_cfg
        self.trace: List[TraceEntry] = []
        self._cache: Dict[Tuple[float, ...], float] = {}

    def __call__(self, point, phase: str) -> float:
        key = tuple(float(v) for v in point)
        if key in self._cache:
            return self._cache[key]
        if len(self.trace) >= self.budget:
            raise _BudgetExhausted()
        score = self._score(key)
        self._cache[key] = score
        self.trace.append(TraceEntry(params=key, objective=score, phase=phase))
        logger.debug("candidate scored", phase=phase, evaluation=len(self.trace), objective=score)
        return score

    def _score(self, point: Tuple[float, ...]) -> float:
        try:
            params = ModelParams(kind=self.kind, p=point)
            signals = run_strategy(self.bars, params, self.strategy_cfg)
            trades, equity = execute(signals, self.bars, self.exec_cfg)
            report = compute_report(trades, equity)
        except (KalmanTrendError, np.linalg.LinAlgError) as e:
            logger.warning("candidate failed", error=str(e), error_type=type(e).__name__)
            return FAILED
        value = float(getattr(report.all, self.objective.value))
        return FAILED if math.isnan(value) else value


def _grid_points(space: SearchSpace) -> Iterator[Tuple[float, ...]]:
    axes = [space.axis(i) for i in range(space.dim)]
    return itertools.product(*axes)


def _lhs_points(space: SearchSpace, seed: int) -> Iterator[np.ndarray]:
    lo = np.array([b[0] for b in space.bounds])
    hi = np.array([b[1] for b in space.bounds])
    sampler = qmc.LatinHypercube(d=space.dim, seed=seed)
    unit = sampler.random(n=settings.optimizer_lhs_samples)
    for u in unit:
        point = np.clip(lo + u * (hi - lo), lo, hi)
        for i in space.integers:
            point[i] = np.round(point[i])
        yield point


def _best(trace: List[TraceEntry]) -> Optional[TraceEntry]:
    """Highest objective among valid vectors; ties go to the smallest vector"""
    best = None
    for entry in trace:
        if best is None or entry.objective > best.objective or (
            entry.objective == best.objective and entry.params < best.params
        ):
            best = entry
    return best


def _refine(space: SearchSpace, start: Tuple[float, ...], evaluate: _Evaluator) -> None:
    free = [
        i for i in range(space.dim)
        if i not in space.integers and space.bounds[i][0] < space.bounds[i][1]
    ]
    if not free:
        return
    lo = np.array([space.bounds[i][0] for i in free])
    hi = np.array([space.bounds[i][1] for i in free])
    width = hi - lo
    base = np.array(start, dtype=float)

    def to_point(z: np.ndarray) -> np.ndarray:
        point = base.copy()
        point[free] = np.clip(lo + np.clip(z, 0.0, 1.0) * width, lo, hi)
        return point

    def loss(z: np.ndarray) -> float:
        score = evaluate(to_point(z), phase="refine")
        if score == FAILED:
            return FAILED_PENALTY
        return -min(score, FAILED_PENALTY)

    z0 = np.clip((base[free] - lo) / width, 0.0, 1.0)
    simplex = [z0]
    for j in range(len(free)):
        vertex = z0.copy()
        vertex[j] += SIMPLEX_STEP if vertex[j] + SIMPLEX_STEP <= 1.0 else -SIMPLEX_STEP
        simplex.append(vertex)

    so.minimize(
        loss,
        x0=z0,
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * len(free),
        options=dict(initial_simplex=np.array(simplex), maxfev=REFINE_MAXFEV, xatol=1e-6, fatol=1e-6),
    )


def optimize(
    bars: BarSeries,
    kind,
    space: SearchSpace,
    objective: Optional[Objective] = None,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    strategy_cfg: Optional[StrategyConfig] = None,
    exec_cfg: Optional[ExecutionConfig] = None,
) -> OptimizationResult:
    """Search `space` for the parameters maximizing the backtest objective"""
    kind = ModelKind.parse(kind) if not isinstance(kind, ModelKind) else kind
    if space.kind is not kind:
        raise InvalidSpace(f"search space is for model {space.kind.value}, not {kind.value}")
    objective = Objective(objective or space.objective)
    budget = budget if budget is not None else (space.budget or settings.optimizer_budget)
    seed = seed if seed is not None else (space.seed if space.seed is not None else settings.optimizer_seed)
    if budget < 1:
        raise InvalidSpace(f"budget must be at least 1, got {budget}")

    space = space.clamped()
    evaluate = _Evaluator(
        bars,
        kind,
        objective,
        budget,
        strategy_cfg or StrategyConfig(),
        exec_cfg or ExecutionConfig(),
    )
    logger.info(
        "optimization started",
        model=kind.value,
        objective=objective.value,
        budget=budget,
        seed=seed,
        phase_one="grid" if space.grid is not None else "lhs",
    )

    try:
        if space.grid is not None:
            for point in _grid_points(space):
                evaluate(point, phase="grid")
        else:
            for point in _lhs_points(space, seed):
                evaluate(point, phase="lhs")
        start = _best(evaluate.trace)
        if start is not None:
            _refine(space, start.params, evaluate)
    except _BudgetExhausted:
        logger.info("budget exhausted", evaluations=len(evaluate.trace))

    valid = []
    for entry in evaluate.trace:
        try:
            valid.append((ModelParams(kind=kind, p=entry.params), entry))
        except InvalidParams:
            continue
    if not valid:
        raise InvalidSpace("no admissible parameter vector was evaluated")
    best = _best([entry for _, entry in valid])
    best_params = next(params for params, entry in valid if entry is best)

    logger.info(
        "optimization finished",
        evaluations=len(evaluate.trace),
        best_objective=best.objective,
    )
    return OptimizationResult(
        best_params=best_params,
        best_objective=best.objective,
        evaluations=len(evaluate.trace),
        trace=evaluate.trace,
        objective=objective,
        seed=seed,
        budget=budget,
    )


def trace_to_frame(result: OptimizationResult) -> pd.DataFrame:
    """One row per evaluation: evaluation, phase, p1..pK, objective"""
    width = result.best_params.kind.param_count
    records = []
    for n, entry in enumerate(result.trace, start=1):
        row = {"evaluation": n, "phase": entry.phase}
        row.update({f"p{i + 1}": v for i, v in enumerate(entry.params)})
        row["objective"] = entry.objective
        records.append(row)
    columns = ["evaluation", "phase"] + [f"p{i + 1}" for i in range(width)] + ["objective"]
    return pd.DataFrame(records, columns=columns)


def write_trace_csv(result: OptimizationResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    trace_to_frame(result).to_csv(path, index=False)
    return path
