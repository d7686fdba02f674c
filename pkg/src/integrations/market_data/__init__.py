from .bars import Bar, BarSeries
from .csv_codec import load_csv, parse_csv, serialize_csv, write_csv
from .synthetic import synthesize

__all__ = [
    "Bar",
    "BarSeries",
    "load_csv",
    "parse_csv",
    "serialize_csv",
    "write_csv",
    "synthesize",
]
