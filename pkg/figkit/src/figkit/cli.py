"""Command line wrapper: figkit --csv <path> --kind <lines|surface> --out <image>."""
import argparse
import sys

import matplotlib.pyplot as plt

from .render import FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figkit", description="Render optomech sweep CSV files as figures"
    )
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--kind", required=True, choices=("lines", "surface"))
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(
        csv_path=args.csv,
        kind=args.kind,
        out_path=args.out,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        title=args.title,
    )
    try:
        fig = render(spec)
        plt.close(fig)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
