"""Command line front end: figurekit --csv scan.csv --family NAME --out fig.svg."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .reader import NoRowsError, SchemaError
from .render import FAMILIES, FamilyError, FigureSpec, Style, render

EXIT_OK = 0
EXIT_INPUT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figurekit",
        description="Render a figure family from a price scan CSV.",
    )
    parser.add_argument("--csv", required=True, help="scan CSV written by the pricing tool")
    parser.add_argument("--family", required=True, choices=FAMILIES)
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    spec = FigureSpec(
        csv_path=args.csv,
        figure_family=args.family,
        output=args.out,
        style=Style(dpi=args.dpi),
    )
    try:
        written = render(spec)
    except (SchemaError, NoRowsError, FamilyError, OSError) as exc:
        print(f"figurekit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(written)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
