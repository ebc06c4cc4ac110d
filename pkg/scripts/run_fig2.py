#!/usr/bin/env python3
"""Accuracy-vs-dimension study for stars at the theoretical budgets.

The additive cells alone take a couple of minutes; the full protocol with
the evaluation-matched multiplicative cells roughly doubles that.
"""

import argparse

from starsopt.figures import fig2

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig2")
    parser.add_argument("--seeds", type=int, default=15)
    parser.add_argument("--seed0", type=int, default=0)
    parser.add_argument("--additive-only", action="store_true")
    args = parser.parse_args()
    kinds = ("add",) if args.additive_only else ("add", "mult")
    for row in fig2(args.out, seeds=args.seeds, seed0=args.seed0, kinds=kinds):
        print(
            f"{row.kind} sigma={row.sigma:.0e} n={row.n}: N={row.iters} "
            f"eps_actual={row.eps_actual:.3e} eps_pred={row.eps_pred:.3e} "
            f"ratio={row.ratio:.3f}"
        )
    print(f"wrote {args.out}; render with: python {args.out}/plot_fig2.py")
