"""Iteration engines: adaptive consensus, adaptive gradient tracking, baselines.

All engines emit a RunTrace whose row k describes the state after k
updates: the error metrics of x_k and the communication spent to reach
x_k. Stopping is checked on the recorded row before the next update, so
a run never pays for an update it does not execute.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Protocol, Union

import numpy as np

from .graphs import Graph
from .mixing import metropolis_hastings, spectral_gap
from .pruning import PruneParams, execute_pruning


class Algorithm(enum.Enum):
    AC = "ac"
    ACGT = "acgt"
    DIST_AVG = "dist_avg"
    RANDOM_GOSSIP = "random_gossip"
    GTA = "gta"


class Objective(Protocol):
    """What the gradient-tracking engines need from an objective."""

    n_nodes: int
    f_star: float

    def local_gradient(self, i: int, x: np.ndarray) -> np.ndarray: ...

    def global_value(self, x: np.ndarray) -> float: ...


@dataclass
class CommLedger:
    volume: int = 0
    rounds: int = 0
    pruning_overhead_counted: bool = True


@dataclass(frozen=True)
class RunConfig:
    algorithm: Algorithm
    graph: Graph
    prune_params: Optional[PruneParams] = None
    tau: Union[int, float] = math.inf
    alpha: Optional[float] = None
    shared_prune: bool = False
    refresh_period: Optional[int] = None
    max_iters: int = 1000
    seed: int = 0
    tolerance: float = 0.0
    count_pruning_overhead: bool = True
    record_matrices: bool = False
    check_tracking: bool = False

    def __post_init__(self) -> None:
        if self.tau != math.inf and (int(self.tau) != self.tau or self.tau < 1):
            raise ValueError(f"tau must be a positive integer or math.inf, got {self.tau}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.algorithm in (Algorithm.ACGT, Algorithm.GTA):
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("gradient methods need a positive step size alpha")
        if self.refresh_period is not None and self.refresh_period < 1:
            raise ValueError("refresh_period must be >= 1")


STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class RunTrace:
    algorithm: Algorithm
    consensus_error: np.ndarray
    volume: np.ndarray
    rounds: np.ndarray
    deviation: np.ndarray
    spectral_gap: np.ndarray
    optimality_error: Optional[np.ndarray]
    status: str
    final_x: np.ndarray
    ledger: CommLedger
    cycle_graphs: tuple[Graph, ...] = ()
    cycle_starts: tuple[int, ...] = ()
    cycle_matrices: tuple[np.ndarray, ...] = ()

    @property
    def iterations(self) -> int:
        return len(self.consensus_error) - 1

    def rows(self) -> Iterator[dict]:
        for k in range(len(self.consensus_error)):
            last = k == len(self.consensus_error) - 1
            yield {
                "k": k,
                "comm_volume": int(self.volume[k]),
                "comm_rounds": int(self.rounds[k]),
                "consensus_error": float(self.consensus_error[k]),
                "optimality_error": (
                    float(self.optimality_error[k]) if self.optimality_error is not None else None
                ),
                "spectral_gap": (
                    float(self.spectral_gap[k]) if not np.isnan(self.spectral_gap[k]) else None
                ),
                "status": self.status if last else None,
            }

    def _cycle_index(self, k: int) -> int:
        idx = 0
        for c, start in enumerate(self.cycle_starts):
            if start <= k:
                idx = c
        return idx

    def iteration_graphs(self) -> list[Graph]:
        """Per-iteration communication graph, reconstructed from cycle records."""
        return [self.cycle_graphs[self._cycle_index(k)] for k in range(self.iterations)]

    def iteration_matrices(self) -> list[np.ndarray]:
        """Per-iteration mixing matrix; the run must set record_matrices."""
        if self.iterations > 0 and not self.cycle_matrices:
            raise ValueError("run did not record matrices; set record_matrices=True")
        return [self.cycle_matrices[self._cycle_index(k)] for k in range(self.iterations)]


def avg_consensus_error(graph: Graph, states: np.ndarray) -> float:
    """Mean over reference edges of the pairwise estimate distance."""
    if graph.edge_count == 0:
        return 0.0
    states = np.asarray(states, dtype=float)
    total = 0.0
    for i, j in graph.edges:
        total += float(np.linalg.norm(states[i] - states[j]))
    return total / graph.edge_count


def _deviation(states: np.ndarray) -> float:
    return float(np.linalg.norm(states - states.mean(axis=0)))


class _TraceBuilder:
    def __init__(self, algorithm: Algorithm, track_optimality: bool) -> None:
        self.algorithm = algorithm
        self.consensus: list[float] = []
        self.volume: list[int] = []
        self.rounds: list[int] = []
        self.deviation: list[float] = []
        self.gap: list[float] = []
        self.optimality: Optional[list[float]] = [] if track_optimality else None
        self.cycle_graphs: list[Graph] = []
        self.cycle_starts: list[int] = []
        self.cycle_matrices: list[np.ndarray] = []

    def record(
        self,
        graph: Graph,
        states: np.ndarray,
        ledger: CommLedger,
        gap: float = math.nan,
        optimality: float = math.nan,
    ) -> float:
        err = avg_consensus_error(graph, states)
        self.consensus.append(err)
        self.volume.append(ledger.volume)
        self.rounds.append(ledger.rounds)
        self.deviation.append(_deviation(states))
        self.gap.append(gap)
        if self.optimality is not None:
            self.optimality.append(optimality)
        return err

    def finish(self, status: str, final_x: np.ndarray, ledger: CommLedger) -> RunTrace:
        return RunTrace(
            algorithm=self.algorithm,
            consensus_error=np.array(self.consensus),
            volume=np.array(self.volume, dtype=np.int64),
            rounds=np.array(self.rounds, dtype=np.int64),
            deviation=np.array(self.deviation),
            spectral_gap=np.array(self.gap),
            optimality_error=np.array(self.optimality) if self.optimality is not None else None,
            status=status,
            final_x=np.array(final_x),
            ledger=ledger,
            cycle_graphs=tuple(self.cycle_graphs),
            cycle_starts=tuple(self.cycle_starts),
            cycle_matrices=tuple(self.cycle_matrices),
        )


def ac_run(cfg: RunConfig, x0: np.ndarray) -> RunTrace:
    """Consensus with a pruning pass every tau iterations."""
    if cfg.algorithm is not Algorithm.AC:
        raise ValueError(f"config is for {cfg.algorithm}, expected AC")
    graph = cfg.graph
    params = cfg.prune_params if cfg.prune_params is not None else PruneParams()
    x = np.array(x0, dtype=float)
    ledger = CommLedger(pruning_overhead_counted=cfg.count_pruning_overhead)
    trace = _TraceBuilder(Algorithm.AC, track_optimality=False)

    q = None
    current = graph
    for k in range(cfg.max_iters + 1):
        is_cycle_start = k == 0 if cfg.tau == math.inf else k % int(cfg.tau) == 0
        err = trace.record(graph, x, ledger)
        if err <= cfg.tolerance:
            return trace.finish(STATUS_CONVERGED, x, ledger)
        if k == cfg.max_iters:
            break
        if is_cycle_start:
            cycle = 0 if cfg.tau == math.inf else k // int(cfg.tau)
            refresh = cfg.refresh_period is not None and cycle % cfg.refresh_period == 0
            if refresh:
                current = graph
            else:
                outcome = execute_pruning(graph, x, params, cfg.seed, cycle)
                current = outcome.pruned_graph
                if outcome.executed and cfg.count_pruning_overhead:
                    # The protocol exchanged estimates over every
                    # reference edge.
                    ledger.volume += 2 * graph.edge_count
                    ledger.rounds += 1
            q = metropolis_hastings(current)
            # The gap on row k describes the matrix applied from k on.
            trace.gap[-1] = spectral_gap(q)
            trace.cycle_graphs.append(current)
            trace.cycle_starts.append(k)
            if cfg.record_matrices:
                trace.cycle_matrices.append(q.q)
        x = q.q @ x
        ledger.volume += 2 * current.edge_count
        ledger.rounds += 1
    return trace.finish(STATUS_MAX_ITERS, x, ledger)


def dist_avg_run(graph: Graph, x0: np.ndarray, max_iters: int, tolerance: float = 0.0) -> RunTrace:
    """Fixed-matrix averaging on the reference graph."""
    q = metropolis_hastings(graph)
    x = np.array(x0, dtype=float)
    ledger = CommLedger()
    trace = _TraceBuilder(Algorithm.DIST_AVG, track_optimality=False)
    trace.cycle_graphs.append(graph)
    trace.cycle_starts.append(0)
    gap = spectral_gap(q)
    for k in range(max_iters + 1):
        err = trace.record(graph, x, ledger, gap=gap if k == 0 else math.nan)
        if err <= tolerance:
            return trace.finish(STATUS_CONVERGED, x, ledger)
        if k == max_iters:
            break
        x = q.q @ x
        ledger.volume += 2 * graph.edge_count
        ledger.rounds += 1
    return trace.finish(STATUS_MAX_ITERS, x, ledger)


def random_gossip_run(
    graph: Graph, x0: np.ndarray, max_rounds: int, tolerance: float = 0.0, seed: int = 0
) -> RunTrace:
    """One uniformly random edge averages its endpoints each round."""
    if graph.edge_count == 0:
        raise ValueError("random gossip needs at least one edge")
    rng = np.random.default_rng(seed)
    x = np.array(x0, dtype=float)
    ledger = CommLedger()
    trace = _TraceBuilder(Algorithm.RANDOM_GOSSIP, track_optimality=False)
    trace.cycle_graphs.append(graph)
    trace.cycle_starts.append(0)
    for k in range(max_rounds + 1):
        err = trace.record(graph, x, ledger)
        if err <= tolerance:
            return trace.finish(STATUS_CONVERGED, x, ledger)
        if k == max_rounds:
            break
        i, j = graph.edges[rng.integers(graph.edge_count)]
        mid = (x[i] + x[j]) / 2.0
        x[i] = mid
        x[j] = mid
        ledger.volume += 2
        ledger.rounds += 1
    return trace.finish(STATUS_MAX_ITERS, x, ledger)


def _check_tracking(y: np.ndarray, grads: np.ndarray) -> None:
    drift = float(np.abs(y.mean(axis=0) - grads.mean(axis=0)).max())
    if drift > 1e-9:
        raise AssertionError(f"gradient tracker drifted from the mean gradient by {drift:.3e}")


def acgt_run(cfg: RunConfig, objective: Objective, x0: np.ndarray) -> RunTrace:
    """Gradient tracking where x and y mixing graphs are re-pruned every cycle."""
    if cfg.algorithm is not Algorithm.ACGT:
        raise ValueError(f"config is for {cfg.algorithm}, expected ACGT")
    graph = cfg.graph
    params = cfg.prune_params if cfg.prune_params is not None else PruneParams()
    alpha = float(cfg.alpha)
    x = np.array(x0, dtype=float)
    grads = np.stack([objective.local_gradient(i, x[i]) for i in range(graph.n)])
    y = grads.copy()
    ledger = CommLedger(pruning_overhead_counted=cfg.count_pruning_overhead)
    trace = _TraceBuilder(Algorithm.ACGT, track_optimality=True)

    q = q_hat = None
    g_x = g_y = graph
    for k in range(cfg.max_iters + 1):
        is_cycle_start = k == 0 if cfg.tau == math.inf else k % int(cfg.tau) == 0
        opt_err = objective.global_value(x.mean(axis=0)) - objective.f_star
        trace.record(graph, x, ledger, optimality=opt_err)
        if cfg.check_tracking:
            _check_tracking(y, grads)
        if cfg.tolerance > 0 and opt_err <= cfg.tolerance:
            return trace.finish(STATUS_CONVERGED, x, ledger)
        if k == cfg.max_iters:
            break
        if is_cycle_start:
            cycle = 0 if cfg.tau == math.inf else k // int(cfg.tau)
            refresh = cfg.refresh_period is not None and cycle % cfg.refresh_period == 0
            if refresh:
                g_x = g_y = graph
            else:
                # The x and y prunes are distinct protocol events with
                # their own substreams and their own overhead charges.
                outcome_x = execute_pruning(graph, x, params, cfg.seed, 2 * cycle)
                g_x = outcome_x.pruned_graph
                if outcome_x.executed and cfg.count_pruning_overhead:
                    ledger.volume += 2 * graph.edge_count
                    ledger.rounds += 1
                if cfg.shared_prune:
                    g_y = g_x
                else:
                    outcome_y = execute_pruning(graph, y, params, cfg.seed, 2 * cycle + 1)
                    g_y = outcome_y.pruned_graph
                    if outcome_y.executed and cfg.count_pruning_overhead:
                        ledger.volume += 2 * graph.edge_count
                        ledger.rounds += 1
            q = metropolis_hastings(g_x)
            q_hat = q if g_y is g_x else metropolis_hastings(g_y)
            trace.gap[-1] = spectral_gap(q)
            trace.cycle_graphs.append(g_x)
            trace.cycle_starts.append(k)
            if cfg.record_matrices:
                trace.cycle_matrices.append(q.q)
        x = q.q @ (x - alpha * y)
        new_grads = np.stack([objective.local_gradient(i, x[i]) for i in range(graph.n)])
        y = q_hat.q @ y + new_grads - grads
        grads = new_grads
        ledger.volume += 2 * g_x.edge_count + 2 * g_y.edge_count
        ledger.rounds += 1
    return trace.finish(STATUS_MAX_ITERS, x, ledger)


def gta_run(
    graph: Graph,
    objective: Objective,
    x0: np.ndarray,
    alpha: float,
    max_iters: int,
    tolerance: float = 0.0,
    check_tracking: bool = False,
) -> RunTrace:
    """Plain gradient tracking with the fixed reference-graph matrix."""
    q = metropolis_hastings(graph)
    x = np.array(x0, dtype=float)
    grads = np.stack([objective.local_gradient(i, x[i]) for i in range(graph.n)])
    y = grads.copy()
    ledger = CommLedger()
    trace = _TraceBuilder(Algorithm.GTA, track_optimality=True)
    trace.cycle_graphs.append(graph)
    trace.cycle_starts.append(0)
    gap = spectral_gap(q)
    for k in range(max_iters + 1):
        opt_err = objective.global_value(x.mean(axis=0)) - objective.f_star
        trace.record(graph, x, ledger, gap=gap if k == 0 else math.nan, optimality=opt_err)
        if check_tracking:
            _check_tracking(y, grads)
        if tolerance > 0 and opt_err <= tolerance:
            return trace.finish(STATUS_CONVERGED, x, ledger)
        if k == max_iters:
            break
        x = q.q @ (x - alpha * y)
        new_grads = np.stack([objective.local_gradient(i, x[i]) for i in range(graph.n)])
        y = q.q @ y + new_grads - grads
        grads = new_grads
        ledger.volume += 2 * graph.edge_count + 2 * graph.edge_count
        ledger.rounds += 1
    return trace.finish(STATUS_MAX_ITERS, x, ledger)
