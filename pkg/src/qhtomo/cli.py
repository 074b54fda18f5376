"""Command-line interface.

Exit codes: 0 success, 2 configuration/usage error, 3 validation failure,
4 runtime failure. The QHTOMO_OUT environment variable overrides --out.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .adapt import GridTooCoarseError, LepskiConfig, select
from .estimate import InfeasibleBandwidthError, direct_estimate, estimate_curve, grid_estimate
from .harness import ConfigError, reference_config, run_experiment
from .io import (
    DATASET_SUFFIX,
    GRID_SUFFIX,
    ParseError,
    dataset_to_csv,
    read_dataset,
    write_csv,
    write_dataset,
    write_estimate_sidecar,
    write_grid,
)
from .simulate import DomainError, sample_homodyne
from .states import InvalidStateError, StateSpec, analytic_state, analytic_wigner

_CONFIG_ERRORS = (
    ConfigError,
    DomainError,
    InvalidStateError,
    ParseError,
    GridTooCoarseError,
    InfeasibleBandwidthError,
)


class ValidationFailure(Exception):
    pass


def _add_state_args(parser):
    parser.add_argument("--state", required=True, help="vacuum | single-photon | fock | coherent | cat")
    parser.add_argument("--k", type=int, default=None, help="Fock index for --state fock")
    parser.add_argument("--q0", type=float, default=3.0, help="cat displacement")
    parser.add_argument("--alpha", type=complex, default=None, help="coherent amplitude, e.g. 2+1j")


def _state_from_args(args):
    kind = args.state
    kwargs = {}
    if kind == "fock":
        kwargs["k"] = args.k
    elif kind == "cat":
        kwargs["q0"] = args.q0
    elif kind == "coherent":
        kwargs["alpha"] = args.alpha
    return StateSpec(kind=kind, **kwargs)


def _out_dir(args):
    out = os.environ.get("QHTOMO_OUT", args.out)
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_simulate(args):
    state = _state_from_args(args)
    data = sample_homodyne(state, args.n, args.eta, args.seed)
    out = _out_dir(args)
    path = os.path.join(out, f"{args.state}_n{args.n}_seed{args.seed}{DATASET_SUFFIX}")
    write_dataset(path, data)
    if args.csv:
        dataset_to_csv(path[: -len(DATASET_SUFFIX)] + ".csv", data)
    print(path)
    return 0


def _cmd_estimate(args):
    data = read_dataset(args.data)
    result = grid_estimate(
        data, args.h, args.half_width, args.n_points, n_angle_bins=args.angle_bins
    )
    out = _out_dir(args)
    stem = os.path.splitext(os.path.basename(args.data))[0]
    path = os.path.join(out, f"{stem}_h{args.h}{GRID_SUFFIX}")
    write_grid(path, result.grid)
    write_estimate_sidecar(path[: -len(GRID_SUFFIX)] + ".json", result, data.seed, data.state)
    print(path)
    return 0


def _cmd_adapt(args):
    data = read_dataset(args.data)
    if args.grid == "default":
        from .adapt import default_grid

        bandwidths = default_grid(data.n, data.noise.gamma)
    else:
        bandwidths = tuple(float(tok) for tok in args.grid.split(","))
    cfg = LepskiConfig(bandwidths=bandwidths, kappa=args.kappa, x=args.x)
    results = estimate_curve(
        data, bandwidths, args.half_width, args.n_points, n_angle_bins=args.angle_bins
    )
    sel = select([r.grid for r in results], data.noise.gamma, cfg, data.n)
    out = _out_dir(args)
    path = os.path.join(out, "selection.csv")
    write_csv(
        path,
        ["m", "h_m", "L_m", "sup_diff_max_j", "threshold", "selected"],
        [
            {
                "m": m + 1,
                "h_m": float(bandwidths[m]),
                "L_m": float(sel.functional[m]),
                "sup_diff_max_j": float(sel.sup_diff_max[m]),
                "threshold": float(sel.thresholds[m]),
                "selected": int(m + 1 == sel.m_hat),
            }
            for m in range(len(bandwidths))
        ],
    )
    grid_path = os.path.join(out, f"selected_h{sel.h_hat:.6f}{GRID_SUFFIX}")
    write_grid(grid_path, results[sel.m_hat - 1].grid)
    print(f"{path} m={sel.m_hat} h={sel.h_hat}")
    return 0


def _cmd_reproduce_figure(args):
    cfg = reference_config(
        args.experiment,
        _out_dir(args),
        seeds=range(args.seeds),
        n=args.n,
    )
    report = run_experiment(cfg)
    k = int(np.argmin(report.mean_curve))
    print(
        f"wrote {cfg.outputs}: mean-curve minimum at m={k + 1} "
        f"(h={report.bandwidths[k]:.4f}), selections={list(report.selected_indices)}"
    )
    return 0


def _cmd_state_info(args):
    state = _state_from_args(args)
    peak = float(np.max(np.abs(analytic_wigner(state, np.linspace(-6, 6, 97), np.zeros(97)))))
    grid = analytic_state(state, 8.0, 256)
    info = {
        "state": json.loads(state.to_json()),
        "plane_integral": grid.integral(),
        "min_value": float(grid.values.min()),
        "peak_on_q_axis": peak,
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def _check(name, ok, detail, failures):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    if not ok:
        failures.append(name)


def _cmd_validate(args):
    from .states import l_jk, pattern_fourier
    from .tomography import kernel_real

    failures = []
    # tail bound on the position-domain pattern-function envelope
    ts = np.arange(0.0, 12.0, 0.01)
    worst = 0.0
    for j in range(0, 8):
        for k in range(0, j + 1):
            bound = np.where(
                ts <= math.sqrt(j + k + 1),
                1.0 / math.pi,
                np.exp(-((ts - math.sqrt(j + k + 1)) ** 2)) / math.pi,
            )
            worst = max(worst, float(np.max(l_jk(j, k, ts) - bound)))
    _check("envelope tail bound", worst <= 1e-12, f"max excess {worst:.2e}", failures)
    # |F pattern|(t) = pi^2 t l(t/2) for t >= 0
    ts = np.linspace(0, 8, 401)
    rel = 0.0
    for j in range(0, 6):
        for k in range(0, j + 1):
            lhs = np.abs(pattern_fourier(j, k, ts))
            rhs = math.pi**2 * np.abs(ts) * l_jk(j, k, ts / 2.0)
            rel = max(rel, float(np.max(np.abs(lhs - rhs)) / np.max(rhs)))
    _check("pattern Fourier identity", rel <= 1e-10, f"max rel dev {rel:.2e}", failures)
    # grid path against the direct estimator
    state = StateSpec(kind="single-photon")
    data = sample_homodyne(state, 200, 0.9, 42)
    truth = analytic_state(state, 6.0, 64)
    Q, P = truth.meshgrid()
    pts = np.column_stack([Q.ravel(), P.ravel()])
    direct = direct_estimate(data, 0.4, pts).reshape(64, 64)
    binned = grid_estimate(data, 0.4, 6.0, 64).grid.values
    dev = float(np.max(np.abs(binned - direct)) / np.max(np.abs(direct)))
    _check("binned vs direct estimator", dev <= 0.05, f"rel sup dev {dev:.4f}", failures)
    # closed-form kernel value at the origin
    v = kernel_real(0.0, 1.0 / 36.0, 0.5)
    expect = (math.exp((1.0 / 36.0) / 0.25) - 1.0) / (2.0 * math.pi / 36.0)
    _check("kernel origin value", abs(v - expect) <= 1e-9, f"|dev| {abs(v - expect):.2e}", failures)
    if failures:
        raise ValidationFailure(", ".join(failures))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="qhtomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a noisy homodyne dataset")
    _add_state_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", action="store_true", help="also write a z,phi CSV")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("estimate", help="reconstruct a Wigner grid from a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--half-width", type=float, default=6.0)
    p.add_argument("--n-points", type=int, default=256)
    p.add_argument("--angle-bins", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("adapt", help="bandwidth selection over a grid of estimates")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default="default", help="'default' or comma-separated bandwidths")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--half-width", type=float, default=6.0)
    p.add_argument("--n-points", type=int, default=256)
    p.add_argument("--angle-bins", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_adapt)

    p = sub.add_parser("reproduce-figure", help="run a full reference experiment")
    p.add_argument("experiment", choices=["single-photon", "cat"])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--n", type=int, default=None, help="override the sample count")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_reproduce_figure)

    p = sub.add_parser("state-info", help="summarize an analytic state")
    _add_state_args(p)
    p.set_defaults(fn=_cmd_state_info)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
