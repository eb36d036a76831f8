#!/usr/bin/env python3
"""Schelling curves and dilemma-condition reports for all four gridworlds."""

import argparse
import dataclasses
import json

from giftworld.metrics import (SCHELLING_ENVS, schelling_diagram, verify_ssd,
                               write_schelling_csv)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-prefix", default="schelling")
    args = ap.parse_args()

    for kind in SCHELLING_ENVS:
        curve = schelling_diagram(kind, args.episodes, args.seed)
        path = f"{args.out_prefix}_{kind}.csv"
        write_schelling_csv(curve, path)
        report = dataclasses.asdict(verify_ssd(curve))
        print(kind, json.dumps({k: report[k] for k in
                                ("fear", "greed", "mutual_cooperation_beats_defection",
                                 "cooperation_beats_exploitation")}))
        print(f"  curve written to {path}")


if __name__ == "__main__":
    main()
