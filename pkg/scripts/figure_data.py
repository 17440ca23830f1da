"""Bias and RMSE curves over [0, 2 h1] for one design, as CSV for plotting.

    python scripts/figure_data.py --design F3 --seed 1 --out f3_curves.csv
"""

from __future__ import annotations

import argparse
import sys

from logdens.simulation import ESTIMATORS, study_config, run_monte_carlo, summarize


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--design", default="F3", choices=("F1", "F2", "F3", "F4"))
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--grid-points", type=int, default=41)
    ap.add_argument("--estimators", default=",".join(ESTIMATORS))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="output file (default stdout)")
    args = ap.parse_args(argv)
    config = study_config(args.seed, designs=(args.design,), reps=args.reps, grid_points=args.grid_points,
                          estimators=tuple(e.strip() for e in args.estimators.split(",")),
                          workers=args.workers)
    result = run_monte_carlo(config)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            summarize(result, fh)
    else:
        sys.stdout.write(summarize(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
