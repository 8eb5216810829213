"""Command line: figkit render --spec figure.json

The spec JSON names the sweep CSV(s), the x column, the optional series
column, the style (lines | loss_panel), and the output image path; rendering
writes both SVG and PNG."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import FigureError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figkit")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render a figure spec")
    rend.add_argument("--spec", required=True, help="figure spec JSON path")
    args = parser.parse_args(argv)
    try:
        written = render(load_spec(args.spec))
    except (FigureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
