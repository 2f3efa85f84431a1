#!/usr/bin/env python3
"""WKB convergence study: epsilon ladder at fixed horizon.

Reproduces the headline order measurement (modulus and full WKB errors
against the leading order plus first corrector) and writes CSV/JSON reports.
"""

import argparse

from semiwkb.harness import DataConfig, ExperimentConfig, converge


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/convergence")
    p.add_argument("--chirp", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=0.5)
    p.add_argument("--points", type=int, default=8192)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    config = ExperimentConfig(
        scenario="converge",
        data=DataConfig(family="smooth_ball", chirp=args.chirp,
                        points=args.points),
        eps_ladder=(1 / 8, 1 / 16, 1 / 32, 1 / 64),
        t_end=args.t_end,
        solver_points=args.points,
        out_dir=args.out,
        threads=args.threads,
    )
    report = converge(config)
    for row in report.rows:
        print(f"eps={row['eps']:<10.6g} err_modulus={row['err_modulus']:.6e} "
              f"err_full={row['err_full']:.6e}  ({row['runtime_s']:.2f}s)")
    print(f"fitted order (modulus): {report.fitted_order_modulus:.3f}")
    print(f"fitted order (full):    {report.fitted_order_full:.3f}")
    if report.excluded_eps:
        print(f"pre-asymptotic guard excluded: {report.excluded_eps}")
    print(f"reports in {args.out} (config {report.config_hash})")


if __name__ == "__main__":
    main()
