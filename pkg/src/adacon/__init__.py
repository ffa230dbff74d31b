"""Adaptive network pruning for decentralized consensus and optimization.

Simulation library for consensus and gradient-tracking algorithms that
periodically prune their communication graph, plus baselines, theory
oracles, and an experiment harness with a CSV-emitting CLI.
"""

from .graphs import Graph, GraphMetrics, erdos_renyi, is_connected, diameter, graph_union
from .mixing import MixingMatrix, SpectralReport, metropolis_hastings, spectral_gap
from .pruning import GREEDY, PruneParams, PruneOutcome, execute_pruning
from .algorithms import (
    Algorithm,
    CommLedger,
    RunConfig,
    RunTrace,
    ac_run,
    acgt_run,
    avg_consensus_error,
    dist_avg_run,
    gta_run,
    random_gossip_run,
)
from .problems import Dataset, NetworkObjective, ObjectiveKind, ObjectiveSpec, make_network_objective
from .analysis import (
    BudgetReport,
    EnvelopeParams,
    EnvelopeReport,
    StepSizeReport,
    budget_comparison,
    compute_rho_prime,
    measure_tau_bar,
    suggest_step_size,
    theorem1_envelope,
)
from .harness import (
    ExperimentConfig,
    Scenario,
    SweepResult,
    load_experiment_config,
    run_sweep,
    step_size_grid_search,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "BudgetReport",
    "CommLedger",
    "Dataset",
    "EnvelopeParams",
    "EnvelopeReport",
    "ExperimentConfig",
    "NetworkObjective",
    "Scenario",
    "StepSizeReport",
    "SweepResult",
    "GREEDY",
    "Graph",
    "GraphMetrics",
    "MixingMatrix",
    "ObjectiveKind",
    "ObjectiveSpec",
    "PruneOutcome",
    "PruneParams",
    "RunConfig",
    "RunTrace",
    "SpectralReport",
    "ac_run",
    "acgt_run",
    "avg_consensus_error",
    "budget_comparison",
    "compute_rho_prime",
    "diameter",
    "dist_avg_run",
    "erdos_renyi",
    "execute_pruning",
    "graph_union",
    "gta_run",
    "is_connected",
    "load_experiment_config",
    "make_network_objective",
    "measure_tau_bar",
    "metropolis_hastings",
    "random_gossip_run",
    "run_sweep",
    "spectral_gap",
    "step_size_grid_search",
    "suggest_step_size",
    "theorem1_envelope",
    "write_trace_csv",
]
