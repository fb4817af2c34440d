"""render_figs: convert simulator CSV/JSON outputs into figures."""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="render_figs",
        description="Render growth-simulator outputs (CSV/JSON) as figures")
    ap.add_argument("--in", dest="in_dir", required=True,
                    help="directory holding the simulator's output files")
    ap.add_argument("--fig", dest="kind", required=True, choices=KINDS)
    ap.add_argument("--out", dest="out_path", required=True,
                    help="output image path (.png or .svg)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(in_dir=args.in_dir, kind=args.kind, out_path=args.out_path)
        render(spec)
    except (SchemaError, ValueError, OSError) as e:
        print(f"render_figs: {e}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
