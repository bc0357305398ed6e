"""Lower estimates of the network-class Rademacher complexity on the check grid,
next to the closed-form upper bound.

    python scripts/run_rademacher_grid.py [--steps 500]
"""

import argparse

from pathnorm.verify import RADEMACHER_GRID, rademacher_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--n-xi", type=int, default=None)
    args = ap.parse_args()
    kw = {k: v for k, v in (("steps", args.steps), ("n_xi", args.n_xi)) if v is not None}

    print(f"{'Q':>5} {'d':>3} {'n':>4} {'L':>3} {'m':>3} {'estimate':>10} {'se':>8} {'bound':>8} {'est/bound':>9}")
    for r in rademacher_rows(RADEMACHER_GRID, seed=args.seed, **kw):
        print(f"{r['Q']:5.2f} {r['d']:3d} {r['n']:4d} {r['L']:3d} {r['m']:3d} "
              f"{r['estimate']:10.4f} {r['se']:8.4f} {r['bound']:8.4f} {r['estimate'] / r['bound']:9.3f}")


if __name__ == "__main__":
    main()
