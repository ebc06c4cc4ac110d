#!/usr/bin/env python3
"""Solver comparison: six zero-order methods on the noisy chained quadratic."""

import argparse

import numpy as np

from starsopt.figures import FIG3_SIGMAS, FIG3_SOLVERS, fig3

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig3")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--budget", type=int, default=10_000)
    parser.add_argument("--seed0", type=int, default=0)
    args = parser.parse_args()
    results = fig3(args.out, seeds=args.seeds, budget=args.budget, seed0=args.seed0)
    for kind in ("add", "mult"):
        for sigma in FIG3_SIGMAS:
            finals = {
                solver: np.mean(
                    [t.f_true[-1] for t in results[(kind, sigma, solver)].trajectories]
                )
                for solver in FIG3_SOLVERS
            }
            summary = " ".join(f"{s}={v:+.3e}" for s, v in finals.items())
            print(f"{kind} sigma={sigma:.0e}: {summary}")
    print(f"wrote {args.out}; render with: python {args.out}/plot_fig3.py")
