"""Reader for the pricing tool's scan CSV, schema v1.

The schema is fixed by the producing command line tool: eleven named
columns, one row per grid point, empty cells where a point failed.  This
module owns its own copy of the column list so the two packages share a
file format, not code.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

CSV_V1_COLUMNS = (
    "scan_var",
    "value",
    "eta",
    "solver",
    "lp_min",
    "lp_max",
    "analytic_discrete",
    "analytic_closed",
    "seed",
    "status",
    "runtime_ms",
)

SCAN_VARS = ("eta", "mu", "sigma", "strike", "spot")

# Columns whose cells are floats.  Those in _OPTIONAL may be empty: eta is
# blank for unregularized runs, the lp and analytic cells for failed rows.
_FLOAT_COLUMNS = (
    "value",
    "eta",
    "lp_min",
    "lp_max",
    "analytic_discrete",
    "analytic_closed",
    "runtime_ms",
)
_OPTIONAL = ("eta", "lp_min", "lp_max", "analytic_discrete", "analytic_closed")


class SchemaError(ValueError):
    """Header or cell contents do not match schema v1.

    `column` names the first offending column so the caller can point at
    the exact field instead of the whole file.
    """

    def __init__(self, column: str, detail: str):
        self.column = column
        super().__init__(f"column {column!r}: {detail}")


class NoRowsError(ValueError):
    """The file carries a valid header but no rows."""


@dataclass(frozen=True)
class ScanRow:
    scan_var: str
    value: float
    eta: float | None
    solver: str
    lp_min: float | None
    lp_max: float | None
    analytic_discrete: float | None
    analytic_closed: float | None
    seed: int
    status: str
    runtime_ms: float

    @property
    def solved(self) -> bool:
        return self.status == "optimal" and self.lp_min is not None


@dataclass(frozen=True)
class ScanTable:
    """All rows of one scan, in file order (the producer writes grid order)."""

    scan_var: str
    rows: tuple[ScanRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[float]:
        """One float per row; missing cells and failed rows become NaN.

        lp_min and lp_max are masked to NaN on any non-optimal row so that
        plots show failed grid points as gaps even if a cell was written.
        """
        if name not in _FLOAT_COLUMNS:
            raise KeyError(name)
        out = []
        for row in self.rows:
            cell = getattr(row, name)
            if name in ("lp_min", "lp_max") and not row.solved:
                cell = None
            out.append(math.nan if cell is None else float(cell))
        return out

    def widths(self) -> list[float]:
        """Interval width per row, NaN where either bound is a gap."""
        lo = self.column("lp_min")
        hi = self.column("lp_max")
        return [h - l for l, h in zip(lo, hi)]


def _check_header(got: list[str]) -> None:
    expected = CSV_V1_COLUMNS
    for i in range(max(len(got), len(expected))):
        if i >= len(expected):
            raise SchemaError(got[i], "unexpected extra column")
        if i >= len(got):
            raise SchemaError(expected[i], "column missing from header")
        if got[i] != expected[i]:
            raise SchemaError(
                expected[i], f"header has {got[i]!r} where {expected[i]!r} belongs"
            )


def _float_cell(column: str, cell: str, line: int) -> float | None:
    if cell == "":
        if column in _OPTIONAL:
            return None
        raise SchemaError(column, f"empty cell on line {line}")
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(column, f"bad float {cell!r} on line {line}") from None


def _parse_row(raw: list[str], line: int) -> ScanRow:
    if len(raw) != len(CSV_V1_COLUMNS):
        at = CSV_V1_COLUMNS[min(len(raw), len(CSV_V1_COLUMNS) - 1)]
        raise SchemaError(
            at, f"line {line} has {len(raw)} cells, expected {len(CSV_V1_COLUMNS)}"
        )
    cells = dict(zip(CSV_V1_COLUMNS, raw))
    if cells["scan_var"] not in SCAN_VARS:
        raise SchemaError(
            "scan_var", f"unknown scan variable {cells['scan_var']!r} on line {line}"
        )
    try:
        seed = int(cells["seed"])
    except ValueError:
        raise SchemaError(
            "seed", f"bad integer {cells['seed']!r} on line {line}"
        ) from None
    if cells["status"] == "":
        raise SchemaError("status", f"empty cell on line {line}")
    return ScanRow(
        scan_var=cells["scan_var"],
        value=_float_cell("value", cells["value"], line),
        eta=_float_cell("eta", cells["eta"], line),
        solver=cells["solver"],
        lp_min=_float_cell("lp_min", cells["lp_min"], line),
        lp_max=_float_cell("lp_max", cells["lp_max"], line),
        analytic_discrete=_float_cell(
            "analytic_discrete", cells["analytic_discrete"], line
        ),
        analytic_closed=_float_cell("analytic_closed", cells["analytic_closed"], line),
        seed=seed,
        status=cells["status"],
        runtime_ms=_float_cell("runtime_ms", cells["runtime_ms"], line),
    )


def read_scan(path: str | Path) -> ScanTable:
    """Parse one scan CSV; raises SchemaError or NoRowsError on bad input."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("scan_var", "file is empty, no header") from None
        _check_header(header)
        rows = [_parse_row(raw, line) for line, raw in enumerate(reader, start=2)]
    if not rows:
        raise NoRowsError(f"{path}: no rows after the header")
    scan_var = rows[0].scan_var
    for row in rows:
        if row.scan_var != scan_var:
            raise SchemaError(
                "scan_var",
                f"mixed scans in one file: {scan_var!r} and {row.scan_var!r}",
            )
    return ScanTable(scan_var=scan_var, rows=tuple(rows))
