#!/usr/bin/env python3
"""Convergence-rate sweeps over network density (iterations vs Fiedler value).

Two sweeps: q=2 with range in [0.1, 0.4] and q=4 with range in [0.4, 0.7].
Default is a quick desk configuration; --full uses 100-node networks and 200
realizations per sweep (tens of minutes).
"""

import argparse
import pathlib
import sys

from constrained_consensus.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true",
                    help="100-node networks, 200 realizations per sweep")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.full:
        base = ["--n", "100", "--realizations", "200", "--max-iters", "60000"]
    else:
        base = ["--n", "50", "--realizations", "50", "--max-iters", "30000"]

    for q, rho_min, rho_max in ((2, 0.1, 0.4), (4, 0.4, 0.7)):
        out = outdir / f"sweep_q{q}.csv"
        code = cli_main(["sweep", *base, "--q", str(q),
                         "--rho-min", str(rho_min), "--rho-max", str(rho_max),
                         "--seed", str(args.seed), "--out", str(out)])
        if code != 0:
            return code
    print(f"CSV files in {outdir}/ "
          "(columns: trial,seed,rho,fiedler,iters_dgtc,conv_dgtc,iters_dgpc,conv_dgpc)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
