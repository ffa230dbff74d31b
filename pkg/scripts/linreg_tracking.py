#!/usr/bin/env python3
"""Gradient tracking on synthetic least squares under pruned communication.

For each pruning rate the step size is tuned on a short fixed-horizon
probe (grid scaled by the smoothness constant of the seed-0 objective),
then the full sweep runs with traces enabled so error-versus-volume
curves can be read from the per-run trace files.
"""

import argparse
import csv
import dataclasses
from pathlib import Path

from adacon.harness import (
    GridPoint,
    load_experiment_config,
    run_single,
    run_sweep,
    step_size_grid_search,
)
from adacon.problems import ObjectiveKind, gen_linear_synthetic, make_network_objective

KAPPAS = (0.0, 0.5, 0.9)
GRID_SCALES = (0.02, 0.05, 0.1, 0.2)


def tune_alpha(cfg, kappa: float, smoothness: float) -> float:
    # Short probe with no tolerance cutoff: candidates are compared on the
    # error actually reached, not on who hits the float floor first.
    probe_cfg = dataclasses.replace(cfg, max_iters=120, tolerance=0.0, traces=False)
    tau = cfg.taus[0]
    beta = cfg.betas[0]

    def probe(alpha: float) -> float:
        point = GridPoint(kappa, tau, beta, alpha)
        record, _ = run_single(probe_cfg, point, trial=0, seed=probe_cfg.seeds[0])
        return record.final_optimality_error

    result = step_size_grid_search(probe, [c / smoothness for c in GRID_SCALES])
    if result.best_alpha is None:
        raise SystemExit(f"every probe step size diverged at kappa={kappa}")
    return result.best_alpha


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/linreg_tracking")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    base = {
        "scenario": "linreg",
        "n": 32,
        "p": 0.5,
        "trials": args.trials,
        "taus": [10],
        "betas": [1.0],
        "alphas": [0.1],
        "n_samples": 3200,
        "d": 10,
        "noise_sigma": 1.0,
        "tolerance": 1e-8,
        "max_iters": 6000,
        "traces": True,
        "jobs": args.jobs,
    }
    seed_cfg = load_experiment_config(base)
    data = gen_linear_synthetic(seed_cfg.n_samples, seed_cfg.d, seed_cfg.noise_sigma, seed_cfg.seeds[0])
    objective = make_network_objective(
        ObjectiveKind.LINEAR, data, seed_cfg.n, seed_cfg.seeds[0], seed_cfg.lam
    )
    smoothness = objective.spec.L

    print(f"{'kappa':>6} {'alpha':>9} {'median volume':>14} {'median error':>13}")
    for kappa in KAPPAS:
        cfg = load_experiment_config(
            dict(base, kappas=[kappa], out_dir=str(Path(args.out) / f"kappa{kappa:g}"))
        )
        alpha = tune_alpha(cfg, kappa, smoothness)
        cfg = dataclasses.replace(cfg, alphas=(alpha,))
        result = run_sweep(cfg)
        if result.failed:
            raise SystemExit(f"{result.failed} runs failed at kappa={kappa}")
        with open(result.summary_csv, newline="") as fh:
            row = next(csv.DictReader(fh))
        print(
            f"{kappa:>6g} {alpha:>9.4f} {float(row['volume_median']):>14.0f}"
            f" {float(row['final_optimality_error_median']):>13.3e}"
        )
    print(f"traces under {args.out}/kappa*/traces/")


if __name__ == "__main__":
    main()
