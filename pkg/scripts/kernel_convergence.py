#!/usr/bin/env python3
"""Monte-Carlo convergence of the random Fourier feature map.

For growing feature counts D, measures how closely the empirical inner
products z(x).z(y) track the Gaussian kernel exp(-||x-y||^2 / 2) over
random input pairs. The error should shrink like 1/sqrt(D).

Example:
    python scripts/kernel_convergence.py --dims 9 --pairs 200
"""

import argparse
import math
import sys

import numpy as np

from rfblt.features import sample_feature_map


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", type=int, default=9)
    parser.add_argument("--pairs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--feature-counts", type=int, nargs="+",
                        default=[50, 200, 1000, 5000, 20000])
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    xs = rng.normal(size=(args.pairs, args.dims))
    ys = xs + rng.uniform(0.0, 2.0, size=(args.pairs, 1)) * rng.normal(
        size=(args.pairs, args.dims)) / math.sqrt(args.dims)
    targets = np.exp(-np.sum((xs - ys) ** 2, axis=1) / 2.0)

    print(f"{'D':>7} {'max |err|':>12} {'rms err':>12} {'rms * sqrt(D)':>14}")
    for D in args.feature_counts:
        fmap = sample_feature_map(args.dims, D, rng_seed=args.seed + D)
        approx = np.einsum("ij,ij->i", fmap.transform(xs), fmap.transform(ys))
        err = approx - targets
        rms = float(np.sqrt(np.mean(err ** 2)))
        print(f"{D:>7} {np.max(np.abs(err)):>12.5f} {rms:>12.5f} "
              f"{rms * math.sqrt(D):>14.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
