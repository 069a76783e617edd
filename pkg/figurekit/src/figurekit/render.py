"""Render scan tables into figure files.

One figure per family.  The regularization family stacks the price
interval over the interval width, both against the regularization
strength on a log axis; drift-vol and strike-spot draw the two bounds
and the analytic reference against the scanned parameter.

Rendering is a pure function of the CSV contents and the style: the
backend is pinned to Agg, fonts and rc settings are fixed, and volatile
output metadata (SVG creation date, hashed ids) is pinned or removed, so
re-rendering the same file yields identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import ScanTable, read_scan

FAMILIES = ("regularization", "drift-vol", "strike-spot")

_FAMILY_SCANS = {
    "regularization": ("eta",),
    "drift-vol": ("mu", "sigma"),
    "strike-spot": ("strike", "spot"),
}

_FORMATS = (".png", ".svg")

# Fixed series colors; the default color cycle is an implementation detail
# of matplotlib and would tie output bytes to its version.
_MIN_COLOR = "#1f77b4"
_MAX_COLOR = "#d62728"
_ANALYTIC_COLOR = "#2c2c2c"
_WIDTH_COLOR = "#7f4f9f"


@dataclass(frozen=True)
class Style:
    figsize: tuple[float, float] = (7.0, 4.5)
    dpi: int = 150
    grid: bool = True
    font_size: float = 10.0


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: which CSV, which family, where to write it."""

    csv_path: str | Path
    figure_family: str
    output: str | Path
    style: Style = field(default_factory=Style)


class FamilyError(ValueError):
    """Family unknown, or the CSV scans a different variable."""


def _rc(style: Style) -> dict:
    return {
        "figure.dpi": style.dpi,
        "savefig.dpi": style.dpi,
        "font.family": "DejaVu Sans",
        "font.size": style.font_size,
        "axes.grid": style.grid,
        "grid.alpha": 0.3,
        "grid.linewidth": 0.6,
        "lines.linewidth": 1.6,
        "legend.framealpha": 0.9,
        "svg.fonttype": "none",
        "svg.hashsalt": "figurekit",
        "path.simplify": False,
    }


def _save(fig, output: Path) -> None:
    if output.suffix == ".svg":
        # Date: None drops the creation timestamp, the one savefig field
        # that changes between otherwise identical runs.
        fig.savefig(output, format="svg", metadata={"Date": None})
    else:
        fig.savefig(output, format="png", metadata={"Software": "figurekit"})


def _draw_bounds(ax, x: list[float], table: ScanTable) -> None:
    ax.plot(x, table.column("lp_min"), color=_MIN_COLOR, label="LP minimum")
    ax.plot(x, table.column("lp_max"), color=_MAX_COLOR, label="LP maximum")
    ax.plot(
        x,
        table.column("analytic_discrete"),
        color=_ANALYTIC_COLOR,
        linestyle="--",
        label="analytic (grid)",
    )
    ax.set_ylabel("price")
    ax.legend(loc="best")


def _log_scale_ok(x: list[float]) -> bool:
    finite = [v for v in x if math.isfinite(v)]
    return bool(finite) and all(v > 0 for v in finite)


def _render_regularization(table: ScanTable, style: Style, output: Path) -> None:
    x = table.column("value")
    fig, (ax_price, ax_width) = plt.subplots(
        2, 1, sharex=True, figsize=style.figsize,
        height_ratios=[2.0, 1.0], constrained_layout=True,
    )
    try:
        _draw_bounds(ax_price, x, table)
        ax_price.set_title("price interval vs regularization strength")
        ax_width.plot(x, table.widths(), color=_WIDTH_COLOR, label="interval width")
        ax_width.set_ylabel("width")
        ax_width.set_xlabel("eta")
        ax_width.legend(loc="best")
        if _log_scale_ok(x):
            ax_width.set_xscale("log")
        _save(fig, output)
    finally:
        plt.close(fig)


def _render_line_family(table: ScanTable, style: Style, output: Path, title: str) -> None:
    x = table.column("value")
    fig, ax = plt.subplots(figsize=style.figsize, constrained_layout=True)
    try:
        _draw_bounds(ax, x, table)
        ax.set_xlabel(table.scan_var)
        ax.set_title(title)
        _save(fig, output)
    finally:
        plt.close(fig)


def render(spec: FigureSpec) -> Path:
    """Read spec.csv_path, draw spec.figure_family, write spec.output.

    Returns the written path.  Raises FamilyError when the family is
    unknown or does not fit the CSV's scan variable, and passes through
    the reader's SchemaError and NoRowsError untouched.
    """
    if spec.figure_family not in FAMILIES:
        raise FamilyError(
            f"unknown family {spec.figure_family!r}, expected one of {FAMILIES}"
        )
    output = Path(spec.output)
    if output.suffix not in _FORMATS:
        raise FamilyError(
            f"output {output.name!r} must end in one of {_FORMATS}"
        )
    table = read_scan(spec.csv_path)
    allowed = _FAMILY_SCANS[spec.figure_family]
    if table.scan_var not in allowed:
        raise FamilyError(
            f"family {spec.figure_family!r} draws scans of {allowed}, "
            f"the CSV scans {table.scan_var!r}"
        )
    with plt.rc_context(_rc(spec.style)):
        if spec.figure_family == "regularization":
            _render_regularization(table, spec.style, output)
        else:
            title = f"price bounds vs {table.scan_var}"
            _render_line_family(table, spec.style, output, title)
    return output
