"""Command-line figure renderer for tomography pipeline artifacts.

Exit codes: 0 success, 2 parse/usage error, 4 other runtime failure.

Examples:
    qhtomo-plots levelset --input run/grids/seed0_selected.qhg --out fig.png
    qhtomo-plots error-curve --input run/mean_curve.csv --out curve.png
    qhtomo-plots all --run-dir run --out-dir figures
"""

from __future__ import annotations

import argparse
import os
import sys

from .formats import ParseError, read_manifest
from .render import FIGURE_KINDS, FigureRequest, render


def _render_one(args):
    req = FigureRequest(
        kind=args.kind, inputs=(args.input,), output=args.out,
        title=args.title, xlabel=args.xlabel, ylabel=args.ylabel,
    )
    print(render(req))
    return 0


def _render_all(args):
    run = args.run_dir
    read_manifest(os.path.join(run, "manifest.json"))
    os.makedirs(args.out_dir, exist_ok=True)
    truth = os.path.join(run, "grids", "truth.qhg")
    jobs = [
        FigureRequest("levelset", (truth,), os.path.join(args.out_dir, "truth_levelset.png"),
                      title="true Wigner function"),
        FigureRequest("surface", (truth,), os.path.join(args.out_dir, "truth_surface.png"),
                      title="true Wigner function"),
        FigureRequest("error-curve", (os.path.join(run, "mean_curve.csv"),),
                      os.path.join(args.out_dir, "error_curve.png"),
                      title="relative sup error vs 1/h"),
        FigureRequest("histogram", (os.path.join(run, "histogram.csv"),),
                      os.path.join(args.out_dir, "selection_histogram.png"),
                      title="selected bandwidth indices"),
    ]
    for req in jobs:
        print(render(req))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="qhtomo-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in FIGURE_KINDS:
        p = sub.add_parser(kind, help=f"render a {kind} figure")
        p.add_argument("--input", required=True, help="artifact file to read")
        p.add_argument("--out", required=True, help="output image path (.png or .svg)")
        p.add_argument("--title", default="")
        p.add_argument("--xlabel", default="")
        p.add_argument("--ylabel", default="")
        p.set_defaults(fn=_render_one, kind=kind)
    p = sub.add_parser("all", help="render the standard figure set from a run directory")
    p.add_argument("--run-dir", required=True, help="experiment output directory (with manifest.json)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_render_all)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
