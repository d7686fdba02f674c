from enum import Enum


class ModelKind(str, Enum):
    ONE = "one"
    TWO = "two"
    THREE = "three"
    FOUR = "four"

    @property
    def param_count(self) -> int:
        """Number of free parameters p1..pK for the model"""
        return {
            ModelKind.ONE: 4,
            ModelKind.TWO: 5,
            ModelKind.THREE: 10,
            ModelKind.FOUR: 15,
        }[self]

    @property
    def noise_index(self) -> int:
        """Zero-based position of the measurement variance R in the parameter vector"""
        return 2 if self in (ModelKind.ONE, ModelKind.TWO) else 7

    @property
    def covariance_indices(self) -> tuple:
        """Zero-based positions of the initial covariance entries"""
        return {
            ModelKind.ONE: (3,),
            ModelKind.TWO: (3, 4),
            ModelKind.THREE: (8, 9),
            ModelKind.FOUR: (8, 9),
        }[self]

    @classmethod
    def parse(cls, value: str) -> "ModelKind":
        """Accept 'four', '4', 'kf4' and 'Four' alike"""
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        aliases = {"1": cls.ONE, "2": cls.TWO, "3": cls.THREE, "4": cls.FOUR}
        if text.startswith("kf"):
            text = text[2:]
        if text in aliases:
            return aliases[text]
        return cls(text)


class Direction(str, Enum):
    LONG = "long"
    SHORT = "short"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.LONG else -1

    @property
    def opposite(self) -> "Direction":
        return Direction.SHORT if self is Direction.LONG else Direction.LONG


class Target(str, Enum):
    LONG = "long"
    SHORT = "short"
    HOLD = "hold"

    @property
    def direction(self):
        """Direction to hold after this target, None for HOLD"""
        if self is Target.LONG:
            return Direction.LONG
        if self is Target.SHORT:
            return Direction.SHORT
        return None


class Indicator(str, Enum):
    SMA = "sma"
    EMA = "ema"
    DEMA = "dema"
    TEMA = "tema"
    KF1 = "kf1"
    KF2 = "kf2"
    KF3 = "kf3"
    KF4 = "kf4"

    @property
    def is_kalman(self) -> bool:
        return self.value.startswith("kf")

    @property
    def model_kind(self) -> ModelKind:
        return ModelKind.parse(self.value)


class Objective(str, Enum):
    NET_PROFIT = "net_profit"
    RECOVERY_RATIO = "recovery_ratio"
    PROFIT_FACTOR = "profit_factor"


class SyntheticKind(str, Enum):
    RANDOM_WALK = "random-walk"
    TREND = "trend"
    RANGE = "range"
