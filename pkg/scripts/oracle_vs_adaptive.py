#!/usr/bin/env python3
"""Compare the data-driven bandwidth selection against the per-seed oracle.

For each seed: simulate, reconstruct at every grid bandwidth, report the
error-minimizing index (known only because the truth is analytic) next to the
index picked by the penalized selection rule.

Example:
    python scripts/oracle_vs_adaptive.py --state single-photon --n 20000 --seeds 5
"""

import argparse

import numpy as np

from qhtomo.adapt import LepskiConfig, default_grid, select
from qhtomo.estimate import estimate_curve, relative_sup
from qhtomo.simulate import sample_homodyne
from qhtomo.states import StateSpec, analytic_state


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--state", default="single-photon", choices=["vacuum", "single-photon", "cat"])
    parser.add_argument("--q0", type=float, default=3.0, help="cat displacement")
    parser.add_argument("--n", type=int, default=20_000)
    parser.add_argument("--eta", type=float, default=0.9)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--half-width", type=float, default=6.0)
    parser.add_argument("--n-points", type=int, default=128)
    parser.add_argument("--kappa", type=float, default=1.0)
    args = parser.parse_args()

    state = StateSpec(kind=args.state, q0=args.q0) if args.state == "cat" else StateSpec(kind=args.state)
    truth = analytic_state(state, args.half_width, args.n_points)
    gamma = (1 - args.eta) / (4 * args.eta)
    bandwidths = default_grid(args.n, gamma)
    cfg = LepskiConfig(bandwidths=bandwidths, kappa=args.kappa)

    print(f"state={args.state} n={args.n} eta={args.eta} M={len(bandwidths)}")
    print("seed  oracle_m  selected_m  oracle_err  selected_err")
    for seed in range(args.seeds):
        data = sample_homodyne(state, args.n, args.eta, seed)
        results = estimate_curve(data, bandwidths, args.half_width, args.n_points)
        errs = np.array([relative_sup(r.grid, truth) for r in results])
        sel = select([r.grid for r in results], gamma, cfg, args.n)
        oracle_m = int(np.argmin(errs)) + 1
        print(
            f"{seed:<5d} {oracle_m:<9d} {sel.m_hat:<11d} "
            f"{errs[oracle_m - 1]:<11.4f} {errs[sel.m_hat - 1]:.4f}"
        )


if __name__ == "__main__":
    main()
