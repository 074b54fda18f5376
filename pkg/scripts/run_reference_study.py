#!/usr/bin/env python3
"""Run a full reference simulation study and persist every artifact.

Examples:
    python scripts/run_reference_study.py single-photon --out runs/single
    python scripts/run_reference_study.py cat --out runs/cat --seeds 5 --n 100000
"""

import argparse

import numpy as np

from qhtomo.harness import reference_config, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("experiment", choices=["single-photon", "cat"])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seeds", type=int, default=20, help="number of replications")
    parser.add_argument("--n", type=int, default=None, help="samples per replication")
    args = parser.parse_args()

    cfg = reference_config(args.experiment, args.out, seeds=range(args.seeds), n=args.n)
    report = run_experiment(cfg)

    k = int(np.argmin(report.mean_curve))
    print(f"experiment: {args.experiment}  (n={cfg.n}, seeds={len(cfg.seeds)})")
    print(f"bandwidth grid: M={len(report.bandwidths)}, h_1={report.bandwidths[0]}")
    print(f"mean error curve minimum: m={k + 1} (h={report.bandwidths[k]:.4f})")
    print("m  h       mean_err   std_err")
    for m, h in enumerate(report.bandwidths):
        print(f"{m + 1:<2d} {h:.4f}  {report.mean_curve[m]:.4f}     {report.std_curve[m]:.4f}")
    print(f"selections: {list(report.selected_indices)}")
    print(f"artifacts written to {cfg.outputs}")


if __name__ == "__main__":
    main()
