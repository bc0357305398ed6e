"""Ten seeded fits at the reference configuration; prints the measured gap
against the a posteriori bound for each run.
"""

import argparse

from pathnorm.experiment import parse_config, run_experiment
from pathnorm.verify import apost_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    rows, _ = run_experiment(parse_config(apost_config(args.runs, args.seed)), jobs=args.jobs)
    print(f"{'run':>3} {'train':>8} {'pop':>8} {'gap':>8} {'norm':>8} {'rhs':>8}  pass")
    for r in rows:
        if r["error"]:
            print(f"{r['index']:3d} error: {r['error']}")
            continue
        print(f"{r['index']:3d} {r['train_risk']:8.4f} {r['pop_risk']:8.4f} {r['gap']:8.4f} "
              f"{r['path_norm']:8.4f} {r['apost_rhs']:8.4f}  {r['apost_pass']}")
    passed = sum(bool(r.get("apost_pass")) for r in rows)
    print(f"{passed}/{len(rows)} runs within the bound")


if __name__ == "__main__":
    main()
