"""Histogram of the mean-shift optimal number of circles over synthetic egos.

Each ego's alter weights are drawn around ``n_modes`` log-spaced modes.
Varying ``--ratio`` and ``--modes`` shows how sensitive the mode count is to
the spacing of the underlying groups.
"""
import argparse
from collections import Counter

import numpy as np

from egocontext.analysis import optimal_circles
from egocontext.synth import mode_population


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--egos", type=int, default=100)
    p.add_argument("--modes", type=int, nargs="+", default=[3, 4, 5])
    p.add_argument("--ratios", type=float, nargs="+", default=[1.5, 2.0, 3.0, 4.0])
    p.add_argument("--size", type=int, default=25)
    p.add_argument("--spread", type=float, default=0.03)
    args = p.parse_args()

    for n_modes in args.modes:
        for ratio in args.ratios:
            counts = [optimal_circles(mode_population(np.random.default_rng(s), n_modes, ratio,
                                                      size=args.size, rel_spread=args.spread))
                      for s in range(args.egos)]
            hist = dict(sorted(Counter(counts).items()))
            print(f"modes={n_modes} ratio={ratio:4.1f}  median={np.median(counts):4.1f}  {hist}")


if __name__ == "__main__":
    main()
