"""Strong-tie share per social layer on planted synthetic worlds.

Sweeps the strong/weak interaction-rate ratio and reports the per-layer
Strong fraction averaged over egos, so one can see where layering stops
separating the two populations.
"""
import argparse

import numpy as np

from egocontext.analysis import mean_strong_fraction
from egocontext.replay import replay
from egocontext.synth import SyntheticWorldSpec, generate_world


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--egos", type=int, default=10)
    p.add_argument("--days", type=float, default=30.0)
    p.add_argument("--weak-alters", type=int, default=50)
    p.add_argument("--ratios", type=float, nargs="+", default=[2.0, 5.0, 10.0, 20.0])
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rate_weak = 0.2
    print(f"{'ratio':>6}  " + "  ".join(f"layer{i}" for i in range(1, 5)))
    for ratio in args.ratios:
        spec = SyntheticWorldSpec(n_egos=args.egos, n_weak_alters=args.weak_alters,
                                  rate_strong=ratio * rate_weak, rate_weak=rate_weak,
                                  duration_days=args.days, seed=args.seed)
        events, tags = generate_world(spec)
        _, engines = replay(events)
        fr = mean_strong_fraction([engines[e].social_net.network for e in sorted(engines)], tags)
        cells = ["   n/a" if np.isnan(f) else f"{f:6.3f}" for f in fr]
        print(f"{ratio:6.1f}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
