"""Per-update latency of the ego-network update versus the number of alters seen.

Prints one line per eta and per n_a bucket, then the post-plateau summary.
Writes the full report as JSON when --out is given.
"""
import argparse
import json

from egocontext.bench import run_bench


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eta", type=int, action="append")
    p.add_argument("--contacts", type=int, default=20_000)
    p.add_argument("--alters", type=int, default=5_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bucket", type=int, default=500, help="n_a bucket width for the table")
    p.add_argument("--lazy", action="store_true", help="rebuild only when the top-eta changes")
    p.add_argument("--out")
    args = p.parse_args()

    rep = run_bench(args.eta or (150, 500, 1000), args.contacts, args.alters,
                    force_rebuild=not args.lazy, seed=args.seed, bucket_width=args.bucket)
    for c in rep.curves:
        print(f"eta={c.eta}")
        for b in c.buckets:
            print(f"  n_a {b['n_a_lo']:5d}-{b['n_a_hi']:5d}  {b['count']:6d} updates  "
                  f"{b['mean_ms']:8.3f} ms")
    print()
    print(f"{'eta':>6} {'pre ms':>9} {'post ms':>9} {'ratio':>6} plateau rebuilds")
    for c in rep.curves:
        print(f"{c.eta:6d} {c.pre_plateau_mean_ms:9.3f} {c.post_plateau_mean_ms:9.3f} "
              f"{c.plateau_ratio:6.2f} {'yes' if c.plateau else 'no':>7} {c.n_rebuilds:8d}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2)


if __name__ == "__main__":
    main()
