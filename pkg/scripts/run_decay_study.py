#!/usr/bin/env python3
"""Large-time diagnostics of the global solution on a log time grid.

Fits the label-position growth exponent (2/n), the velocity sup decay
(2/n - 1), conservation of the amplitude L2 norm, and monitors the slow
decay of the phase-gradient L^p norm.
"""

import argparse

from semiwkb.harness import DataConfig, ExperimentConfig, decay_study


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/decay")
    p.add_argument("--t-min", type=float, default=100.0)
    p.add_argument("--t-max", type=float, default=10000.0)
    p.add_argument("--samples", type=int, default=13)
    args = p.parse_args()

    config = ExperimentConfig(
        scenario="decay-study",
        data=DataConfig(family="smooth_ball", points=8192),
        t_tail=(args.t_min, args.t_max, args.samples),
        out_dir=args.out,
    )
    report = decay_study(config)
    for name, fit in report["fits"].items():
        print(f"{name:<14s} exponent={fit['exponent']:+.4f} "
              f"stderr={fit['stderr']:.2e}")
    print("phase-gradient L^p strictly decreasing:",
          report["grad_phi0_lp_strictly_decreasing"])
    print(f"report in {args.out}")


if __name__ == "__main__":
    main()
