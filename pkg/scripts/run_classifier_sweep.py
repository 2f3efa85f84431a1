#!/usr/bin/env python3
"""Classifier sweep over amplitude and velocity scales.

Velocity scale 1 is the exact non-caustic family (global for every amplitude
scale); under- and overshoots collapse or break in finite time.
"""

import argparse

from semiwkb.harness import DataConfig, ExperimentConfig, classify_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/classify")
    p.add_argument("--family", default="smooth_ball",
                   choices=["smooth_ball", "sample", "ball"])
    p.add_argument("--n", type=int, default=3)
    args = p.parse_args()

    config = ExperimentConfig(
        scenario="classify",
        data=DataConfig(family=args.family, n=args.n, points=4096),
        amplitude_scales=(0.1, 1.0, 10.0),
        velocity_scales=(0.8, 0.9, 1.0, 1.1, 1.25),
        out_dir=args.out,
    )
    rows = classify_sweep(config)
    for row in rows:
        print(f"alpha={row['amplitude_scale']:<6g} beta={row['velocity_scale']:<6g} "
              f"{row['kind']:26s} {row['certificate']}")


if __name__ == "__main__":
    main()
