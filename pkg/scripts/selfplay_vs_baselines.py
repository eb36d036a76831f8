#!/usr/bin/env python3
"""Self-play comparison runs: gifting agents vs baselines on one environment.

Launches one run per (roster, seed) and reports final collective rewards.
"""

import argparse
import os

import numpy as np

from giftworld.presets import PRESETS, preset_run_config
from giftworld.trainer import train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", nargs="+", default=["ssg-selfplay", "ssg-a2c"],
                    choices=sorted(PRESETS))
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--episodes", type=int, default=None)
    ap.add_argument("--out-root", default="runs")
    ap.add_argument("--window", type=int, default=1000,
                    help="final episodes averaged for the report")
    args = ap.parse_args()

    for preset in args.presets:
        finals = []
        for seed in range(args.seeds):
            out_dir = os.path.join(args.out_root, f"{preset}-seed{seed}")
            cfg = preset_run_config(preset, seed=seed, episodes=args.episodes,
                                    out_dir=out_dir)
            res = train(cfg, log_every=max(1, cfg.episodes // 10))
            window = min(args.window, len(res.metrics))
            finals.append(np.mean([m["collective"] for m in res.metrics[-window:]]))
        print(f"{preset}: final-{args.window} collective per seed "
              f"{np.round(finals, 2).tolist()} (mean {np.mean(finals):.2f})")


if __name__ == "__main__":
    main()
