"""Run every registered scenario through the CLI and summarise the exit codes.

usage: python3 scripts/run_all.py [--out results] [--seed 0] [--threads 0] [--quick]
--quick uses small replication counts for a fast smoke run.
"""
import argparse
import sys
import time

from upperfn.cli import main as cli_main
from upperfn.scenarios import SCENARIOS

QUICK = {"prop1_gaussian_grid": 2000, "thm1_wiener_lp": 1000, "thm2_ou_modulus": 1000,
         "thm3_kde": 1000, "thm4_lil": 100, "thm7_pointwise": 1000, "thm9_supnorm": 1000,
         "thm10_ll": 100}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    codes = {}
    for name in SCENARIOS:
        argv = ["--scenario", name, "--seed", str(args.seed), "--threads", str(args.threads),
                "--out", args.out]
        if args.quick:
            argv += ["--replications", str(QUICK[name])]
        t0 = time.time()
        codes[name] = cli_main(argv)
        print(f"== {name}: exit {codes[name]} ({time.time() - t0:.1f}s)")
    bad = {k: v for k, v in codes.items() if v != 0}
    print("all scenarios passed" if not bad else f"non-zero exits: {bad}")
    return 0 if not bad else max(bad.values())


if __name__ == "__main__":
    sys.exit(main())
