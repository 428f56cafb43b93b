#!/usr/bin/env python3
"""Per-iteration Latitude runtime versus row count, with the log-log slope.

Thin wrapper over ``latitude bench`` that also repeats the measurement to
show its spread.
"""
import argparse
import sys

import numpy as np

from latitude.cli import bench_slope
from latitude.solver import SolverConfig, latitude_fit
from latitude.synth import SynthSpec, gen_planted


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="250,500,1000")
    parser.add_argument("--m", type=int, default=200)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--niter", type=int, default=3)
    parser.add_argument("--trials", type=int, default=3)
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    slopes = []
    for trial in range(args.trials):
        times = []
        for n in sizes:
            _, noisy, _ = gen_planted(SynthSpec(n=n, m=args.m, k_true=args.k, seed=trial))
            _, rep = latitude_fit(noisy, SolverConfig(k=args.k, niter=args.niter, seed=trial))
            times.append(float(np.median(rep.wall_time_per_iteration)))
        slopes.append(bench_slope(sizes, times))
        print(f"trial {trial}: " + ", ".join(f"n={n}: {t:.3f}s" for n, t in zip(sizes, times))
              + f"  slope {slopes[-1]:.3f}")
    print(f"slope mean {np.mean(slopes):.3f}, range [{min(slopes):.3f}, {max(slopes):.3f}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
