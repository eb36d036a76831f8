#!/usr/bin/env python3
"""Full-resolution (T, S) phase diagram of the closed-form gifting dynamics.

Writes the 101x101 cooperation-probability grid as CSV; takes a couple of
seconds. Render it with your plotting tool of choice.
"""

import argparse

from giftworld.matrix import DynamicsConfig, GridSpec, sweep_heatmap, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="phase_diagram.csv")
    ap.add_argument("--step", type=float, default=0.02)
    ap.add_argument("--seeds", type=int, default=1, help="random inits per cell")
    ap.add_argument("--rng-seed", type=int, default=0)
    args = ap.parse_args()

    result = sweep_heatmap(GridSpec(0.0, 2.0, args.step),
                           GridSpec(-1.0, 1.0, args.step),
                           args.seeds, DynamicsConfig(rng_seed=args.rng_seed))
    write_sweep_csv(result, args.out)
    print(f"wrote {result.mean_cooperation.shape[0]}x"
          f"{result.mean_cooperation.shape[1]} grid to {args.out}")


if __name__ == "__main__":
    main()
