#!/usr/bin/env python3
"""Spectral gap of the pruned mixing matrices as the pruning rate grows.

Fixed-horizon runs of the adaptive protocol on G(64, 0.8) over a kappa
grid; prints the mean spectral gap per rate, with kappa = 0 as the
unpruned reference.
"""

import argparse
import csv

from adacon.harness import load_experiment_config, run_sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/gap_vs_pruning")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--p", type=float, default=0.8)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    cfg = load_experiment_config(
        {
            "scenario": "consensus",
            "n": args.n,
            "p": args.p,
            "trials": args.trials,
            "kappas": [round(0.1 * i, 1) for i in range(10)],
            "taus": [10],
            "betas": [1.0],
            "tolerance": 0.0,
            "max_iters": 200,
            "out_dir": args.out,
            "jobs": args.jobs,
        }
    )
    result = run_sweep(cfg)
    if result.failed:
        raise SystemExit(f"{result.failed} runs failed")

    with open(result.summary_csv, newline="") as fh:
        rows = {float(r["kappa"]): float(r["mean_spectral_gap_mean"]) for r in csv.DictReader(fh)}
    reference = rows[0.0]
    print(f"{'kappa':>6} {'mean gap':>10} {'vs kappa=0':>11}")
    for kappa in sorted(rows):
        print(f"{kappa:>6.1f} {rows[kappa]:>10.4f} {rows[kappa] / reference:>11.3f}")
    print(f"summary written to {result.summary_csv}")


if __name__ == "__main__":
    main()
