"""Command line for the figure renderer: figures <results.csv> --preset ... --out ..."""

from __future__ import annotations

import argparse
import sys

from . import PRESETS, EmptySelection, MissingColumn, preset_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render ESR figures from a simulator results table.")
    parser.add_argument("results", help="path to a results.csv file")
    parser.add_argument("--preset", required=True, choices=sorted(PRESETS),
                        help="which figure to render")
    parser.add_argument("--out", required=True, help="output image path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        out = render(args.results, preset_spec(args.preset, args.out))
    except (OSError, MissingColumn, EmptySelection, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
