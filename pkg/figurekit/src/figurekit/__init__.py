"""Figure generation for derivative price scan CSVs.

Consumes the scan CSV written by the pricing command line tool (schema v1)
and renders one figure per family: regularization (eta scans), drift-vol
(mu or sigma scans), and strike-spot (strike or spot scans).  The package
talks to the pricing engine only through that CSV file.
"""

from .reader import (
    CSV_V1_COLUMNS,
    NoRowsError,
    ScanRow,
    ScanTable,
    SchemaError,
    read_scan,
)
from .render import FAMILIES, FigureSpec, Style, render

__all__ = [
    "CSV_V1_COLUMNS",
    "FAMILIES",
    "FigureSpec",
    "NoRowsError",
    "ScanRow",
    "ScanTable",
    "SchemaError",
    "Style",
    "read_scan",
    "render",
]

__version__ = "0.1.0"
