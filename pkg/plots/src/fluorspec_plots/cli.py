"""Invocation: render <dataset-dir> <fig-id> [--format png|svg] [--dpi N]."""

from __future__ import annotations

import argparse
import sys

from .layout import MissingDatasetError
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fluorspec-render",
        description="Render a fluorspec figure dataset to an image.")
    parser.add_argument("dataset_dir", help="directory with the figure CSVs")
    parser.add_argument("fig_id", type=int, choices=(1, 2, 3, 4))
    parser.add_argument("--format", default="png", choices=("png", "svg"))
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        out = render(args.dataset_dir, args.fig_id, fmt=args.format,
                     dpi=args.dpi)
    except MissingDatasetError as exc:
        print(f"missing dataset file: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
