"""render_figure: one CSV in, one PNG or PDF out.

Exit codes: 0 success, 1 validation error (bad kind, missing column,
malformed or empty CSV), 3 I/O failure. Nothing is written on failure.
"""

from __future__ import annotations

import argparse
import sys

from . import figures, reader


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figure", description=__doc__,
    )
    parser.add_argument(
        "--kind", required=True, choices=list(figures.KINDS),
        help="which of the six figures to render",
    )
    parser.add_argument(
        "--in", dest="csv_path", required=True, metavar="CSV",
        help="input result table from the simulator",
    )
    parser.add_argument(
        "--out", dest="out_path", required=True, metavar="IMG",
        help="output image path (.png or .pdf)",
    )
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = reader.load_table(args.csv_path)
        fig = figures.render(args.kind, table)
        figures.save(fig, args.out_path)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
