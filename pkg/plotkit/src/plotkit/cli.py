"""plotkit command line: render solver CSVs into one panel figure."""

from __future__ import annotations

import argparse
import sys

from .panels import GridMismatch, PanelSpec, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plotkit",
        description="Render `t,x,u` CSV grids as a multi-panel figure.")
    ap.add_argument("csv", nargs="+", help="one CSV per panel")
    ap.add_argument("--labels", nargs="*", default=[],
                    help="panel titles, one per CSV")
    ap.add_argument("--out", default="panels.png")
    ap.add_argument("--style", choices=("lines", "surface"), default="lines")
    args = ap.parse_args(argv)
    spec = PanelSpec(csv_paths=args.csv, labels=args.labels,
                     out_path=args.out, style=args.style)
    try:
        path = render(spec)
    except GridMismatch as exc:
        print(f"grid mismatch: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
