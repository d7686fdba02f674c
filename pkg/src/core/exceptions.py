"""
Exception hierarchy shared by every module
"""

from typing import Optional


class KalmanTrendError(Exception):
    """Base class for all library errors"""


class MarketDataError(KalmanTrendError):
    """Invalid bar data; `line` is the 1-based line of the offending CSV row"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedRow(MarketDataError):
    pass


class OrderViolation(MarketDataError):
    pass


class RangeViolation(MarketDataError):
    pass


class InvalidArgument(KalmanTrendError):
    pass


class SeriesTooShort(KalmanTrendError):
    pass


class ZeroWeightSum(KalmanTrendError):
    pass


class DimensionMismatch(KalmanTrendError):
    pass


class SingularResidual(KalmanTrendError):
    pass


class InvalidParams(KalmanTrendError):
    pass


class InsufficientHistory(KalmanTrendError):
    pass


class EmptyLedger(KalmanTrendError):
    pass


class InvalidSpace(KalmanTrendError):
    pass
