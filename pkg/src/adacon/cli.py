"""Command-line front end for sweeps, single-scenario runs, and theory checks.

Exit codes: 0 success, 1 configuration problem (bad flags, bad config
file), 2 run failure (an experiment raised or a checked bound failed).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Optional

from . import analysis
from .algorithms import Algorithm, RunConfig, ac_run
from .graphs import diameter
from .harness import (
    ConfigError,
    Scenario,
    connected_graph,
    consensus_initial_states,
    load_experiment_config,
    parse_beta,
    parse_tau,
    run_sweep,
)
from .pruning import PruneParams


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1.
    def error(self, message: str) -> None:
        raise ConfigError(message)


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="base seed for the trial list")
    p.add_argument("--out", help="output directory (default results)")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--traces", action="store_true", default=None, help="write per-run trace CSVs")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kappa", help="comma list of pruning fractions")
    p.add_argument("--tau", help="comma list of cycle lengths ('inf' allowed)")
    p.add_argument("--beta", help="comma list of temperatures ('greedy' allowed)")
    p.add_argument("--tol", type=float, help="stopping tolerance")
    p.add_argument("--max-iters", type=int, help="iteration cap")
    p.add_argument("--trials", type=int, help="number of trial seeds")
    p.add_argument("--n", type=int, help="node count")
    p.add_argument("--p", type=float, help="edge probability")
    p.add_argument("--d", type=int, help="vector dimension")
    p.add_argument("--kappa-lower", type=float, help="retention floor (default 1 - kappa)")
    p.add_argument("--refresh-period", type=int, help="use the reference graph every R cycles")
    p.add_argument(
        "--no-overhead",
        action="store_true",
        default=None,
        help="exclude pruning exchanges from the communication ledger",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="adacon", description="Adaptive network pruning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("consensus", help="averaging sweep with adaptive pruning")
    _add_shared(pc)
    _add_grid_flags(pc)
    pc.set_defaults(func=cmd_consensus)

    po = sub.add_parser("optimize", help="gradient-tracking sweep on a regression problem")
    _add_shared(po)
    _add_grid_flags(po)
    po.add_argument("--problem", choices=("linreg", "logreg"))
    po.add_argument("--data", help="CSV dataset (default: synthetic)")
    po.add_argument("--label-col", help="label column name in --data")
    po.add_argument("--alpha", help="comma list of step sizes")
    po.add_argument("--lam", type=float, help="regularization strength")
    po.add_argument("--n-samples", type=int, help="synthetic dataset size")
    po.set_defaults(func=cmd_optimize)

    ps = sub.add_parser("sweep", help="run any scenario straight from a config file")
    _add_shared(ps)
    ps.set_defaults(func=cmd_sweep)

    pa = sub.add_parser("analyze", help="theory checks on a fresh run")
    _add_shared(pa)
    pa.add_argument("--check", required=True, choices=("envelope", "rho-prime", "step-size"))
    pa.add_argument("--n", type=int, default=16)
    pa.add_argument("--p", type=float, default=0.5)
    pa.add_argument("--d", type=int, default=10)
    pa.add_argument("--kappa", type=float, default=0.5)
    pa.add_argument("--kappa-lower", type=float)
    pa.add_argument("--tau", default="5")
    pa.add_argument("--beta", default="1")
    pa.add_argument("--max-iters", type=int, default=200)
    pa.add_argument("--refresh-period", type=int, default=1)
    pa.add_argument("--smoothness", type=float, default=1.0)
    pa.add_argument("--tau-hat", type=int)
    pa.set_defaults(func=cmd_analyze)

    pb = sub.add_parser("budget", help="fixed-bit-budget comparison, pruned vs reference")
    _add_shared(pb)
    pb.add_argument("--kappa", type=float, default=0.5)
    pb.add_argument("--kappa-lower", type=float)
    pb.add_argument("--beta", default="greedy")
    pb.add_argument("--budget-bits", type=float, required=True)
    pb.add_argument("--bits-per-vector", type=float, required=True)
    pb.add_argument("--n", type=int, default=16)
    pb.add_argument("--p", type=float, default=0.5)
    pb.add_argument("--d", type=int, default=10)
    pb.set_defaults(func=cmd_budget)

    return parser


def _split(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError(f"empty list value {text!r}")
    return items


def _floats(text: Optional[str]) -> Optional[list[float]]:
    items = _split(text)
    if items is None:
        return None
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _common_overrides(args: argparse.Namespace) -> dict:
    over = {
        "seed": args.seed,
        "out_dir": args.out,
        "jobs": args.jobs,
        "traces": args.traces,
    }
    for flag, key in (
        ("n", "n"),
        ("p", "p"),
        ("d", "d"),
        ("trials", "trials"),
        ("tol", "tolerance"),
        ("max_iters", "max_iters"),
        ("kappa_lower", "kappa_lower"),
        ("refresh_period", "refresh_period"),
        ("lam", "lam"),
        ("n_samples", "n_samples"),
    ):
        if hasattr(args, flag):
            over[key] = getattr(args, flag)
    if getattr(args, "kappa", None) is not None:
        over["kappas"] = _floats(args.kappa)
    if getattr(args, "tau", None) is not None:
        over["taus"] = _split(args.tau)
    if getattr(args, "beta", None) is not None:
        over["betas"] = _split(args.beta)
    if getattr(args, "alpha", None) is not None:
        over["alphas"] = _floats(args.alpha)
    if getattr(args, "no_overhead", None):
        over["count_pruning_overhead"] = False
    if getattr(args, "data", None) is not None:
        over["data_path"] = args.data
    if getattr(args, "label_col", None) is not None:
        over["label_column"] = args.label_col
    return over


def _finish_sweep(cfg) -> int:
    result = run_sweep(cfg)
    if result.budget_csv is not None:
        print(f"wrote {result.budget_csv} ({len(result.records)} runs)")
    else:
        print(
            f"wrote {result.runs_csv} and {result.summary_csv} "
            f"({len(result.records)} runs, {result.failed} failed)"
        )
        for path in result.trace_paths:
            print(f"trace: {path}")
    return 2 if result.failed else 0


def cmd_consensus(args: argparse.Namespace) -> int:
    over = _common_overrides(args)
    over["scenario"] = "consensus"
    return _finish_sweep(load_experiment_config(args.config or {}, over))


def cmd_optimize(args: argparse.Namespace) -> int:
    over = _common_overrides(args)
    if args.problem is not None:
        over["scenario"] = args.problem
    cfg = load_experiment_config(args.config or {}, over)
    if cfg.scenario not in (Scenario.LINREG, Scenario.LOGREG):
        raise ConfigError("optimize needs --problem linreg|logreg (or a config that sets it)")
    return _finish_sweep(cfg)


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.config is None:
        raise ConfigError("sweep needs --config")
    over = _common_overrides(args)
    return _finish_sweep(load_experiment_config(args.config, over))


def _analyze_run(args: argparse.Namespace, record_matrices: bool):
    seed = args.seed if args.seed is not None else 0
    graph = connected_graph(args.n, args.p, seed)
    kappa = args.kappa
    lower = (1.0 - kappa) if args.kappa_lower is None else args.kappa_lower
    cfg = RunConfig(
        algorithm=Algorithm.AC,
        graph=graph,
        prune_params=PruneParams(kappa_upper=kappa, kappa_lower=lower, beta=parse_beta(args.beta)),
        tau=parse_tau(args.tau),
        refresh_period=args.refresh_period,
        max_iters=args.max_iters,
        seed=seed,
        record_matrices=record_matrices,
    )
    trace = ac_run(cfg, consensus_initial_states(args.n, args.d, seed))
    return graph, cfg, trace


def _envelope_params(graph, cfg, trace) -> analysis.EnvelopeParams:
    q = 1.0 / (1.0 + max(graph.degrees))
    if cfg.refresh_period is not None and cfg.tau != math.inf:
        # A reference-graph cycle recurs within any such iteration window.
        tau_bar = (cfg.refresh_period - 1) * int(cfg.tau) + 1
    else:
        tau_bar = analysis.measure_tau_bar(trace.iteration_graphs())
    return analysis.EnvelopeParams(q=q, tau_bar=tau_bar, d_g=diameter(graph))


def cmd_analyze(args: argparse.Namespace) -> int:
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    if args.check == "envelope":
        graph, cfg, trace = _analyze_run(args, record_matrices=False)
        params = _envelope_params(graph, cfg, trace)
        report = analysis.theorem1_envelope(trace, params)
        analysis.save_envelope_report(report, str(out / "envelope.csv"), str(out / "envelope.json"))
        print(
            f"envelope holds: {report.holds}; window connectivity: {report.assumption_ok}; "
            f"min margin {report.min_margin:.6g}; wrote {out / 'envelope.csv'}"
        )
        return 0 if report.holds and report.assumption_ok else 2
    if args.check == "rho-prime":
        graph, cfg, trace = _analyze_run(args, record_matrices=True)
        q_seq = trace.iteration_matrices()
        params = _envelope_params(graph, cfg, trace)
        report = analysis.suggest_step_size(params, graph.n, args.smoothness, q_seq=q_seq)
        payload = dataclasses.asdict(report)
        if args.tau_hat is not None:
            payload["rho_prime_at_tau_hat"] = analysis.compute_rho_prime(
                q_seq, len(q_seq), args.tau_hat
            )
        with open(out / "rho_prime.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(
            f"tau_hat {report.tau_hat}: rho' = {report.rho_prime:.6g} "
            f"(admissible: {report.admissible}); wrote {out / 'rho_prime.json'}"
        )
        return 0
    graph, cfg, trace = _analyze_run(args, record_matrices=False)
    params = _envelope_params(graph, cfg, trace)
    report = analysis.suggest_step_size(params, graph.n, args.smoothness)
    with open(out / "step_size.json", "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(report), fh, indent=2)
        fh.write("\n")
    print(
        f"eta {report.eta}, tau_eta {report.tau_eta}, alpha_max {report.alpha_max:.6g}; "
        f"wrote {out / 'step_size.json'}"
    )
    return 0


def cmd_budget(args: argparse.Namespace) -> int:
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    graph = connected_graph(args.n, args.p, seed)
    report = analysis.budget_comparison(
        graph,
        args.kappa,
        args.budget_bits,
        args.bits_per_vector,
        consensus_initial_states(args.n, args.d, seed),
        seed,
        beta=parse_beta(args.beta),
        kappa_lower=args.kappa_lower,
    )
    analysis.save_budget_report(report, str(out / "budget.json"))
    print(
        f"reference: {report.iters_reference} iters, error {report.error_reference:.6g}; "
        f"pruned: {report.iters_pruned} iters, error {report.error_pruned:.6g}; "
        f"wrote {out / 'budget.json'}"
    )
    if not report.pruned_connected:
        print("warning: the pruned graph is disconnected", file=sys.stderr)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
