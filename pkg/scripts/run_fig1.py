#!/usr/bin/env python3
"""Noise-invariance study: stars vs rg, n=8, 20 seeds, both noise kinds."""

import argparse

from starsopt.figures import fig1

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig1")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--budget", type=int, default=2000)
    parser.add_argument("--seed0", type=int, default=0)
    args = parser.parse_args()
    fig1(args.out, seeds=args.seeds, budget=args.budget, seed0=args.seed0)
    print(f"wrote {args.out}; render with: python {args.out}/plot_fig1.py")
