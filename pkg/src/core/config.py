from typing import Optional
from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import AliasChoices, Field, field_validator


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    log_level: str = Field(
        default="INFO",
        validation_alias=AliasChoices("KALMAN_TREND_LOG", "LOG_LEVEL"),
    )
    output_dir: Path = Path("out")

    # Execution (E-mini S&P 500: 50 USD per index point, 4 USD round trip)
    point_value: float = 50.0
    commission_round_trip: float = 4.0
    contracts: int = 1
    tick_size: float = 0.25

    # Strategy
    default_warmup: int = 20
    default_offset: float = 0.0

    # Indicators
    ema_tail_mass: float = 1e-8
    oscillator_period: int = 14
    default_ma_period: int = 12

    # Optimizer
    optimizer_budget: int = 5000
    optimizer_seed: int = 42
    optimizer_lhs_samples: int = 64

    # Bundled fixtures
    fixtures_dir: Optional[Path] = None

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        level = str(v or "INFO").strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {v!r}")
        return level

    @field_validator("point_value")
    @classmethod
    def check_point_value(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("point_value must be positive")
        return v

    @field_validator("commission_round_trip", "default_offset")
    @classmethod
    def check_non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("contracts")
    @classmethod
    def check_contracts(cls, v: int) -> int:
        if v < 1:
            raise ValueError("contracts must be at least 1")
        return v

    @field_validator("default_warmup")
    @classmethod
    def check_warmup(cls, v: int) -> int:
        if v < 0:
            raise ValueError("default_warmup must be non-negative")
        return v

    @field_validator("optimizer_budget", "optimizer_lhs_samples", "default_ma_period", "oscillator_period")
    @classmethod
    def check_counts(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @property
    def fixtures_path(self) -> Path:
        """Directory holding the bundled model configs and the sample ledger"""
        if self.fixtures_dir:
            return self.fixtures_dir
        return Path(__file__).resolve().parent.parent.parent / "fixtures"


settings = Settings()
