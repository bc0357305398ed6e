"""Sweep n over {100, 400, 1600} and fit the log-log slope of the generalization gap.

    python scripts/run_gap_scaling.py --repeats 20 --jobs 4 --out runs/gap
"""

import argparse
from pathlib import Path

import numpy as np

from pathnorm.experiment import loglog_slope, parse_config, results_csv, run_experiment
from pathnorm.io import dumps
from pathnorm.verify import gap_scaling_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    cfg = parse_config(gap_scaling_config(args.repeats, args.seed))
    rows, report = run_experiment(cfg, jobs=args.jobs)
    ok = [r for r in rows if not r["error"]]
    ns = sorted({r["n"] for r in ok})
    for n in ns:
        gaps = np.array([r["gap"] for r in ok if r["n"] == n])
        print(f"n={n:5d}  mean gap {gaps.mean():.5f}  se {gaps.std(ddof=1) / np.sqrt(gaps.size):.5f}")
    means = [np.mean([r["gap"] for r in ok if r["n"] == n]) for n in ns]
    print(f"log-log slope {loglog_slope(ns, means):.3f} (reference -0.5)")
    if report["n_errors"]:
        print(f"{report['n_errors']} grid points failed; see report.json")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(results_csv(rows, report["config_hash"]), newline="\n")
        (out / "report.json").write_text(dumps(report) + "\n", newline="\n")


if __name__ == "__main__":
    main()
