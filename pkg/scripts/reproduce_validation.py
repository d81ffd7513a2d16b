#!/usr/bin/env python3
"""Convergence validation runs (consensus metric vs iteration, q=2 and q=3).

Writes one CSV per dimension into results/.  The default is a quick desk
configuration; --full runs the 100-node, 50-trial Monte-Carlo setup (takes
minutes).
"""

import argparse
import pathlib
import sys

from constrained_consensus.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true",
                    help="100 nodes, 50 trials, deep 1e-9 threshold")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.full:
        base = ["--n", "100", "--trials", "50", "--rho", "0.3",
                "--threshold", "1e-9", "--max-iters", "600000"]
    else:
        base = ["--n", "30", "--trials", "10", "--rho", "0.35",
                "--threshold", "1e-9", "--max-iters", "60000"]

    for q in (2, 3):
        out = outdir / f"validation_q{q}.csv"
        code = cli_main(["run", *base, "--q", str(q),
                         "--seed", str(args.seed), "--out", str(out)])
        if code != 0:
            return code
    print(f"CSV files in {outdir}/ (columns: algo,trial,seed,t,consensus_metric,potential)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
