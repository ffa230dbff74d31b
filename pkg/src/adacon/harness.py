"""Experiment configuration, sweep execution, and CSV output.

A sweep is a grid of algorithm settings crossed with a list of trial
seeds. Each run writes one row to runs.csv; per-grid-point aggregates go
to summary.csv; per-iteration traces are optional. All output is a pure
function of the config, so re-running a sweep reproduces the files
byte for byte regardless of the jobs setting.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from itertools import product
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import analysis
from .algorithms import Algorithm, RunConfig, RunTrace, ac_run, acgt_run
from .graphs import Graph, erdos_renyi, is_connected
from .problems import (
    Dataset,
    ObjectiveKind,
    gen_linear_synthetic,
    gen_logistic_synthetic,
    load_csv_dataset,
    make_network_objective,
)
from .pruning import GREEDY, Beta, PruneParams, _Greedy


class ConfigError(ValueError):
    """Bad experiment configuration; the CLI maps this to exit code 1."""


class Scenario(enum.Enum):
    CONSENSUS = "consensus"
    LINREG = "linreg"
    LOGREG = "logreg"
    BUDGET = "budget"


_OPT_SCENARIOS = (Scenario.LINREG, Scenario.LOGREG)

TRACE_HEADER = (
    "k",
    "comm_volume",
    "comm_rounds",
    "consensus_error",
    "optimality_error",
    "spectral_gap",
    "status",
)
RUNS_HEADER = (
    "scenario",
    "algorithm",
    "n",
    "p",
    "kappa",
    "tau",
    "beta",
    "alpha",
    "trial",
    "seed",
    "volume",
    "rounds",
    "iterations",
    "final_consensus_error",
    "final_optimality_error",
    "mean_spectral_gap",
    "status",
)
SUMMARY_HEADER = (
    "scenario",
    "algorithm",
    "n",
    "p",
    "kappa",
    "tau",
    "beta",
    "alpha",
    "trials",
    "volume_mean",
    "volume_median",
    "rounds_mean",
    "rounds_median",
    "iterations_mean",
    "final_consensus_error_mean",
    "final_consensus_error_median",
    "final_optimality_error_mean",
    "final_optimality_error_median",
    "mean_spectral_gap_mean",
    "converged_frac",
)
BUDGET_HEADER = (
    "scenario",
    "n",
    "p",
    "kappa",
    "beta",
    "trial",
    "seed",
    "edges_reference",
    "edges_pruned",
    "pruned_connected",
    "iters_reference",
    "iters_pruned",
    "error_reference",
    "error_pruned",
    "gap_reference",
    "gap_pruned",
)

DIVERGENCE_LIMIT = 1e10


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    n: int = 32
    p: float = 0.5
    seeds: tuple[int, ...] = tuple(range(20))
    kappas: tuple[float, ...] = (0.0, 0.5)
    taus: tuple[Union[int, float], ...] = (10,)
    betas: tuple[Beta, ...] = (1.0,)
    alphas: tuple[float, ...] = ()
    kappa_lower: Optional[float] = None
    tolerance: float = 0.0
    max_iters: int = 1000
    d: int = 10
    n_samples: int = 3200
    lam: float = 0.0
    noise_sigma: float = 1.0
    data_path: Optional[str] = None
    label_column: Optional[str] = None
    normalize: bool = False
    budget_bits: float = 0.0
    bits_per_vector: float = 0.0
    count_pruning_overhead: bool = True
    shared_prune: bool = False
    refresh_period: Optional[int] = None
    out_dir: str = "results"
    traces: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.scenario, Scenario):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.n < 2:
            raise ConfigError("need at least 2 nodes")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"edge probability must lie in (0,1], got {self.p}")
        if not self.seeds:
            raise ConfigError("need at least one trial seed")
        if not (self.kappas and self.taus and self.betas):
            raise ConfigError("kappa, tau, and beta grids must be nonempty")
        if any(not 0.0 <= k < 1.0 for k in self.kappas):
            raise ConfigError("kappa grid values must lie in [0,1)")
        if self.scenario in _OPT_SCENARIOS and not self.alphas:
            raise ConfigError(f"{self.scenario.value} needs a nonempty alpha grid")
        if self.scenario is Scenario.BUDGET and (
            self.budget_bits <= 0 or self.bits_per_vector <= 0
        ):
            raise ConfigError("budget scenario needs budget_bits and bits_per_vector > 0")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.d < 1 or self.n_samples < 1:
            raise ConfigError("d and n_samples must be >= 1")
        if (self.data_path is None) != (self.label_column is None):
            raise ConfigError("data_path and label_column must be given together")

    @property
    def trials(self) -> int:
        return len(self.seeds)


def parse_tau(value: object) -> Union[int, float]:
    raw = value
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"bad tau value {raw!r}") from None
    if isinstance(value, (int, float)):
        if value == math.inf:
            return math.inf
        if float(value).is_integer() and value >= 1:
            return int(value)
    raise ConfigError(f"tau must be a positive integer or 'inf', got {raw!r}")


def parse_beta(value: object) -> Beta:
    raw = value
    if isinstance(value, _Greedy):
        return value
    if isinstance(value, str):
        if value.lower() == "greedy":
            return GREEDY
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"bad beta value {raw!r}") from None
    if isinstance(value, (int, float)) and value >= 0 and math.isfinite(value):
        return float(value)
    raise ConfigError(f"beta must be a nonnegative number or 'greedy', got {raw!r}")


_FIELD_NAMES = None


def load_experiment_config(source: Union[str, dict], overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build a config from a JSON file or dict; overrides (CLI flags) win.

    Accepted keys are the ExperimentConfig field names, plus the pair
    seed/trials as a shorthand for seeds = [seed, seed+1, ..., seed+trials-1].
    """
    global _FIELD_NAMES
    if _FIELD_NAMES is None:
        _FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
    if isinstance(source, str):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        raw = dict(source)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    base_seed = merged.pop("seed", None)
    trials = merged.pop("trials", None)
    if "seeds" not in merged and (base_seed is not None or trials is not None):
        start = int(base_seed) if base_seed is not None else 0
        count = int(trials) if trials is not None else 20
        if count < 1:
            raise ConfigError("trials must be >= 1")
        merged["seeds"] = list(range(start, start + count))
    unknown = set(merged) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" not in merged:
        raise ConfigError("config needs a scenario")
    try:
        merged["scenario"] = Scenario(str(merged["scenario"]).lower())
    except ValueError:
        raise ConfigError(f"unknown scenario {merged['scenario']!r}") from None
    for key in ("seeds", "kappas", "alphas"):
        if key in merged:
            merged[key] = tuple(merged[key])
    if "taus" in merged:
        merged["taus"] = tuple(parse_tau(t) for t in merged["taus"])
    if "betas" in merged:
        merged["betas"] = tuple(parse_beta(b) for b in merged["betas"])
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class GridPoint:
    kappa: float
    tau: Union[int, float, None]
    beta: Beta
    alpha: Optional[float]


def grid_points(cfg: ExperimentConfig) -> list[GridPoint]:
    if cfg.scenario is Scenario.CONSENSUS:
        return [GridPoint(k, t, b, None) for k, t, b in product(cfg.kappas, cfg.taus, cfg.betas)]
    if cfg.scenario is Scenario.BUDGET:
        return [GridPoint(k, None, b, None) for k, b in product(cfg.kappas, cfg.betas)]
    return [
        GridPoint(k, t, b, a)
        for k, t, b, a in product(cfg.kappas, cfg.taus, cfg.betas, cfg.alphas)
    ]


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    algorithm: str
    n: int
    p: float
    kappa: float
    tau: Union[int, float, None]
    beta: Beta
    alpha: Optional[float]
    trial: int
    seed: int
    volume: Optional[int]
    rounds: Optional[int]
    iterations: Optional[int]
    final_consensus_error: Optional[float]
    final_optimality_error: Optional[float]
    mean_spectral_gap: Optional[float]
    status: str


@dataclass(frozen=True)
class BudgetRecord:
    scenario: str
    n: int
    p: float
    kappa: float
    beta: Beta
    trial: int
    seed: int
    edges_reference: int
    edges_pruned: int
    pruned_connected: bool
    iters_reference: int
    iters_pruned: int
    error_reference: float
    error_pruned: float
    gap_reference: float
    gap_pruned: float


def connected_graph(n: int, p: float, seed: int, max_attempts: int = 64) -> Graph:
    """G(n,p) sample, deterministically re-drawn until connected."""
    for attempt in range(max_attempts):
        g = erdos_renyi(n, p, seed + attempt * 1_000_003)
        if is_connected(g):
            return g
    raise RuntimeError(f"no connected G({n},{p}) found from seed {seed}")


def consensus_initial_states(n: int, d: int, seed: int) -> np.ndarray:
    return np.random.default_rng([seed, 0]).standard_normal((n, d))


def _prune_params(cfg: ExperimentConfig, point: GridPoint) -> PruneParams:
    lower = (1.0 - point.kappa) if cfg.kappa_lower is None else cfg.kappa_lower
    return PruneParams(kappa_upper=point.kappa, kappa_lower=lower, beta=point.beta)


@functools.lru_cache(maxsize=4)
def _load_data(path: str, label_column: str, normalize: bool) -> Dataset:
    return load_csv_dataset(path, label_column, normalize)


def _dataset_for(cfg: ExperimentConfig, seed: int) -> Dataset:
    if cfg.data_path is not None:
        return _load_data(cfg.data_path, cfg.label_column, cfg.normalize)
    if cfg.scenario is Scenario.LINREG:
        return gen_linear_synthetic(cfg.n_samples, cfg.d, cfg.noise_sigma, seed)
    return gen_logistic_synthetic(cfg.n_samples, cfg.d, seed)


def _mean_gap(trace: RunTrace) -> Optional[float]:
    gaps = [float(g) for g in trace.spectral_gap if not np.isnan(g)]
    return sum(gaps) / len(gaps) if gaps else None


def run_single(
    cfg: ExperimentConfig, point: GridPoint, trial: int, seed: int
) -> tuple[RunRecord, Optional[RunTrace]]:
    graph = connected_graph(cfg.n, cfg.p, seed)
    if cfg.scenario is Scenario.CONSENSUS:
        algorithm = Algorithm.AC
        run_cfg = RunConfig(
            algorithm=algorithm,
            graph=graph,
            prune_params=_prune_params(cfg, point),
            tau=point.tau,
            refresh_period=cfg.refresh_period,
            max_iters=cfg.max_iters,
            seed=seed,
            tolerance=cfg.tolerance,
            count_pruning_overhead=cfg.count_pruning_overhead,
        )
        trace = ac_run(run_cfg, consensus_initial_states(cfg.n, cfg.d, seed))
    else:
        algorithm = Algorithm.ACGT
        kind = ObjectiveKind.LINEAR if cfg.scenario is Scenario.LINREG else ObjectiveKind.LOGISTIC
        objective = make_network_objective(kind, _dataset_for(cfg, seed), cfg.n, seed, cfg.lam)
        run_cfg = RunConfig(
            algorithm=algorithm,
            graph=graph,
            prune_params=_prune_params(cfg, point),
            tau=point.tau,
            alpha=point.alpha,
            shared_prune=cfg.shared_prune,
            refresh_period=cfg.refresh_period,
            max_iters=cfg.max_iters,
            seed=seed,
            tolerance=cfg.tolerance,
            count_pruning_overhead=cfg.count_pruning_overhead,
        )
        trace = acgt_run(run_cfg, objective, np.zeros((cfg.n, cfg.d)))
    record = RunRecord(
        scenario=cfg.scenario.value,
        algorithm=algorithm.value,
        n=cfg.n,
        p=cfg.p,
        kappa=point.kappa,
        tau=point.tau,
        beta=point.beta,
        alpha=point.alpha,
        trial=trial,
        seed=seed,
        volume=int(trace.volume[-1]),
        rounds=int(trace.rounds[-1]),
        iterations=trace.iterations,
        final_consensus_error=float(trace.consensus_error[-1]),
        final_optimality_error=(
            float(trace.optimality_error[-1]) if trace.optimality_error is not None else None
        ),
        mean_spectral_gap=_mean_gap(trace),
        status=trace.status,
    )
    return record, trace


def run_budget_single(
    cfg: ExperimentConfig, point: GridPoint, trial: int, seed: int
) -> BudgetRecord:
    graph = connected_graph(cfg.n, cfg.p, seed)
    x0 = consensus_initial_states(cfg.n, cfg.d, seed)
    report = analysis.budget_comparison(
        graph,
        point.kappa,
        cfg.budget_bits,
        cfg.bits_per_vector,
        x0,
        seed,
        beta=point.beta,
        kappa_lower=cfg.kappa_lower,
    )
    return BudgetRecord(
        scenario=cfg.scenario.value,
        n=cfg.n,
        p=cfg.p,
        kappa=point.kappa,
        beta=point.beta,
        trial=trial,
        seed=seed,
        edges_reference=report.edges_reference,
        edges_pruned=report.edges_pruned,
        pruned_connected=report.pruned_connected,
        iters_reference=report.iters_reference,
        iters_pruned=report.iters_pruned,
        error_reference=report.error_reference,
        error_pruned=report.error_pruned,
        gap_reference=report.gap_reference,
        gap_pruned=report.gap_pruned,
    )


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, _Greedy):
        return "greedy"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_trace_csv(trace: RunTrace, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for row in trace.rows():
            fh.write(",".join(_fmt(row[key]) for key in TRACE_HEADER) + "\n")


def _execute_task(args: tuple) -> tuple:
    cfg, index, point, trial, seed = args
    try:
        if cfg.scenario is Scenario.BUDGET:
            return index, run_budget_single(cfg, point, trial, seed), None
        record, trace = run_single(cfg, point, trial, seed)
        rows = list(trace.rows()) if cfg.traces else None
        return index, record, rows
    except Exception as exc:  # per-run failures become rows, the sweep continues
        failed = RunRecord(
            scenario=cfg.scenario.value,
            algorithm="",
            n=cfg.n,
            p=cfg.p,
            kappa=point.kappa,
            tau=point.tau,
            beta=point.beta,
            alpha=point.alpha,
            trial=trial,
            seed=seed,
            volume=None,
            rounds=None,
            iterations=None,
            final_consensus_error=None,
            final_optimality_error=None,
            mean_spectral_gap=None,
            status=f"error: {exc}",
        )
        return index, failed, None


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    runs_csv: Optional[Path]
    summary_csv: Optional[Path]
    budget_csv: Optional[Path]
    trace_paths: tuple[Path, ...]

    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if r.status.startswith("error"))


def _aggregate(point: GridPoint, records: list[RunRecord], cfg: ExperimentConfig) -> list:
    ok = [r for r in records if not r.status.startswith("error")]

    def stats(values: list[Optional[float]]) -> tuple[float, float]:
        vals = [v for v in values if v is not None]
        if not vals:
            return math.nan, math.nan
        return float(np.mean(vals)), float(np.median(vals))

    vol_mean, vol_med = stats([r.volume for r in ok])
    rnd_mean, rnd_med = stats([r.rounds for r in ok])
    it_mean, _ = stats([r.iterations for r in ok])
    err_mean, err_med = stats([r.final_consensus_error for r in ok])
    opt_mean, opt_med = stats([r.final_optimality_error for r in ok])
    gap_mean, _ = stats([r.mean_spectral_gap for r in ok])
    converged = sum(1 for r in ok if r.status == "converged")
    return [
        cfg.scenario.value,
        ok[0].algorithm if ok else "",
        cfg.n,
        cfg.p,
        point.kappa,
        point.tau,
        point.beta,
        point.alpha,
        len(records),
        vol_mean,
        vol_med,
        rnd_mean,
        rnd_med,
        it_mean,
        err_mean,
        err_med,
        opt_mean,
        opt_med,
        gap_mean,
        converged / len(records),
    ]


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run the whole grid x trials, write CSVs under cfg.out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    points = grid_points(cfg)
    tasks = [
        (cfg, idx, point, trial, seed)
        for idx, point in enumerate(points)
        for trial, seed in enumerate(cfg.seeds)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_execute_task, tasks))
    else:
        results = [_execute_task(t) for t in tasks]

    if cfg.scenario is Scenario.BUDGET:
        budget_csv = out / "budget.csv"
        rows = [
            [getattr(rec, name) for name in BUDGET_HEADER]
            for _, rec, _ in results
        ]
        _write_csv(budget_csv, BUDGET_HEADER, rows)
        return SweepResult(
            records=tuple(rec for _, rec, _ in results),
            runs_csv=None,
            summary_csv=None,
            budget_csv=budget_csv,
            trace_paths=(),
        )

    records = [rec for _, rec, _ in results]
    runs_csv = out / "runs.csv"
    _write_csv(runs_csv, RUNS_HEADER, [[getattr(r, name) for name in RUNS_HEADER] for r in records])

    summary_csv = out / "summary.csv"
    per_point: dict[int, list[RunRecord]] = {}
    for idx, rec, _ in results:
        per_point.setdefault(idx, []).append(rec)
    summary_rows = [_aggregate(points[idx], per_point[idx], cfg) for idx in range(len(points))]
    _write_csv(summary_csv, SUMMARY_HEADER, summary_rows)

    trace_paths: list[Path] = []
    if cfg.traces:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)
        for idx, rec, rows in results:
            if rows is None:
                continue
            path = trace_dir / f"{cfg.scenario.value}_pt{idx:03d}_trial{rec.trial:03d}.csv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(",".join(TRACE_HEADER) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(row[key]) for key in TRACE_HEADER) + "\n")
            trace_paths.append(path)

    return SweepResult(
        records=tuple(records),
        runs_csv=runs_csv,
        summary_csv=summary_csv,
        budget_csv=None,
        trace_paths=tuple(trace_paths),
    )


@dataclass(frozen=True)
class GridSearchResult:
    best_alpha: Optional[float]
    errors: tuple[tuple[float, float], ...]
    diverged: tuple[float, ...]


def step_size_grid_search(
    run_fn: Callable[[float], float], alphas: Sequence[float]
) -> GridSearchResult:
    """Pick the step size with the smallest final error; ties go to the larger one."""
    if not alphas:
        raise ConfigError("alpha grid must be nonempty")
    errors: list[tuple[float, float]] = []
    diverged: list[float] = []
    for alpha in alphas:
        err = float(run_fn(alpha))
        if not math.isfinite(err) or err > DIVERGENCE_LIMIT:
            diverged.append(alpha)
        else:
            errors.append((alpha, err))
    best = min(errors, key=lambda ae: (ae[1], -ae[0]))[0] if errors else None
    return GridSearchResult(best_alpha=best, errors=tuple(errors), diverged=tuple(diverged))
