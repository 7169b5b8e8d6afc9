"""Command-line figure renderer for symkg CSV outputs."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="symkg-plot",
        description="Render convergence, efficiency, and drift figures from CSVs.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        help="input CSV files from the experiment runner")
    parser.add_argument("--slopes", type=float, nargs="*", default=[],
                        help="guide-line slopes to overlay (orders figures)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        inputs=tuple(args.inputs),
        kind=args.kind,
        out=args.out,
        slopes=tuple(args.slopes),
    )
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
