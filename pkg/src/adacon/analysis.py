"""Theory oracles: consensus envelope, step-size machinery, budget comparison.

Two per-window rates are easy to conflate, so they get distinct names:
gamma_envelope = 1 - q^(tau_bar*d_g) (envelope decay) and
q_window = q^(tau_bar*d_g) (step-size window rate).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algorithms import RunTrace, dist_avg_run
from .graphs import Graph, graph_union, is_connected
from .mixing import MixingMatrix, deviation_norm, metropolis_hastings, product_range, spectral_gap
from .pruning import GREEDY, Beta, PruneParams, execute_pruning


@dataclass(frozen=True)
class EnvelopeParams:
    q: float
    tau_bar: int
    d_g: int

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0,1), got {self.q}")
        if self.tau_bar < 1:
            raise ValueError("connectivity window must be >= 1")
        if self.d_g < 1:
            raise ValueError("diameter must be >= 1")

    @property
    def gamma_envelope(self) -> float:
        return 1.0 - self.q ** (self.tau_bar * self.d_g)

    @property
    def q_window(self) -> float:
        return self.q ** (self.tau_bar * self.d_g)


@dataclass(frozen=True)
class EnvelopeReport:
    holds: bool
    assumption_ok: bool
    actual: np.ndarray
    bound: np.ndarray
    margins: np.ndarray
    violations: tuple[int, ...]

    @property
    def min_margin(self) -> float:
        return float(self.margins.min()) if len(self.margins) else math.inf


@dataclass(frozen=True)
class StepSizeReport:
    tau_hat: int
    rho_prime: float
    eta: int
    tau_eta: int
    alpha_max: float
    admissible: bool


@dataclass(frozen=True)
class BudgetReport:
    budget_bits: float
    bits_per_vector: float
    kappa: float
    edges_reference: int
    edges_pruned: int
    pruned_connected: bool
    iters_reference: int
    iters_pruned: int
    error_reference: float
    error_pruned: float
    gap_reference: float
    gap_pruned: float


def window_unions_connected(graphs: Sequence[Graph], tau_bar: int) -> bool:
    """Every window of tau_bar consecutive graphs must union to a connected graph."""
    if tau_bar < 1:
        raise ValueError("window must be >= 1")
    if not graphs:
        raise ValueError("empty graph sequence")
    if len(graphs) < tau_bar:
        return is_connected(_union(graphs))
    return all(
        is_connected(_union(graphs[j : j + tau_bar])) for j in range(len(graphs) - tau_bar + 1)
    )


def _union(graphs: Sequence[Graph]) -> Graph:
    return graph_union(graphs)


def measure_tau_bar(graphs: Sequence[Graph]) -> int:
    """Smallest window length over which every union is connected."""
    for w in range(1, len(graphs) + 1):
        if window_unions_connected(graphs, w):
            return w
    raise ValueError("no window works: the union of all graphs is disconnected")


def theorem1_envelope(trace: RunTrace, params: EnvelopeParams) -> EnvelopeReport:
    """Check the consensus deviation of a run against its geometric envelope.

    The bound at iteration k is n^(3/2) * gamma^floor(k/(tau_bar*d_g))
    times the initial deviation; margins are bound/actual per iteration.
    A window-connectivity failure is reported via assumption_ok, separately
    from a bound violation.
    """
    actual = np.asarray(trace.deviation, dtype=float)
    n = trace.final_x.shape[0]
    period = params.tau_bar * params.d_g
    k = np.arange(len(actual))
    bound = n**1.5 * params.gamma_envelope ** (k // period) * actual[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        margins = np.where(actual > 0.0, bound / actual, math.inf)
    violations = tuple(int(i) for i in np.nonzero(actual > bound)[0])
    graphs = trace.iteration_graphs()
    # A zero-iteration trace applied no matrices; the window condition
    # is vacuous.
    assumption_ok = not graphs or window_unions_connected(graphs, params.tau_bar)
    return EnvelopeReport(
        holds=not violations,
        assumption_ok=assumption_ok,
        actual=actual,
        bound=bound,
        margins=margins,
        violations=violations,
    )


def save_envelope_report(report: EnvelopeReport, csv_path: str, json_path: Optional[str] = None) -> None:
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("k,actual,bound,margin\n")
        for k in range(len(report.actual)):
            fh.write(
                f"{k},{report.actual[k]:.17g},{report.bound[k]:.17g},{report.margins[k]:.17g}\n"
            )
    if json_path is not None:
        summary = {
            "holds": report.holds,
            "assumption_ok": report.assumption_ok,
            "min_margin": report.min_margin,
            "violations": list(report.violations),
        }
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")


def compute_rho_prime(
    q_seq: Sequence["MixingMatrix | np.ndarray"], k: int, tau_hat: int
) -> float:
    """2*(1+tau_hat^2) times the worst squared deviation of any tau_hat-step product up to k."""
    if tau_hat < 1:
        raise ValueError("window must be >= 1")
    if tau_hat > k:
        raise ValueError(f"window {tau_hat} exceeds index {k}")
    if k > len(q_seq):
        raise ValueError(f"index {k} exceeds sequence length {len(q_seq)}")
    worst = max(deviation_norm(product_range(q_seq, j - tau_hat, j)) for j in range(tau_hat, k + 1))
    return 2.0 * (1.0 + tau_hat**2) * worst**2


def certified_eta(params: EnvelopeParams, n: int) -> int:
    gamma = params.q_window
    num = max(
        math.log(16.0 * n**3 * params.tau_bar**2 * params.d_g**2),
        16.0 * math.log(4.0 / gamma),
    )
    return math.ceil(num / gamma)


def suggest_step_size(
    params: EnvelopeParams,
    n: int,
    smoothness: float,
    q_seq: Optional[Sequence["MixingMatrix | np.ndarray"]] = None,
) -> StepSizeReport:
    """Step-size bound alpha_max = min(1, sqrt(rho')/(58*L*tau_hat^2)).

    With a realized matrix sequence, tau_hat is the smallest window whose
    empirical rho' drops below 1/4. Without one, the certified window
    tau_eta with the 1/4 cap is used.
    """
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    eta = certified_eta(params, n)
    tau_eta = eta * params.tau_bar * params.d_g
    if q_seq is None:
        tau_hat, rho_prime, admissible = tau_eta, 0.25, True
    else:
        k = len(q_seq)
        candidates = [(t, compute_rho_prime(q_seq, k, t)) for t in range(1, k + 1)]
        admissible_ones = [(t, r) for t, r in candidates if r < 0.25]
        if admissible_ones:
            tau_hat, rho_prime = admissible_ones[0]
            admissible = True
        else:
            tau_hat, rho_prime = min(candidates, key=lambda tr: tr[1])
            admissible = False
    alpha_max = min(1.0, math.sqrt(rho_prime) / (58.0 * smoothness * tau_hat**2))
    return StepSizeReport(
        tau_hat=tau_hat,
        rho_prime=rho_prime,
        eta=eta,
        tau_eta=tau_eta,
        alpha_max=alpha_max,
        admissible=admissible,
    )


def budget_comparison(
    graph: Graph,
    kappa: float,
    budget_bits: float,
    bits_per_vector: float,
    x0: np.ndarray,
    seed: int,
    beta: Beta = GREEDY,
    kappa_lower: Optional[float] = None,
) -> BudgetReport:
    """Fixed-bit-budget shootout: averaging on the reference graph vs a pruned one.

    The budget buys T = B/(2*D*|E|) iterations unpruned and T/(1-kappa)
    pruned. A single pruning pass (driven by x0 as the estimates) builds
    the sparser graph; both runs then report final consensus error and
    the spectral gap they mixed with.
    """
    if not 0.0 <= kappa < 1.0:
        raise ValueError("kappa must lie in [0,1)")
    if budget_bits <= 0 or bits_per_vector <= 0:
        raise ValueError("budget and message size must be positive")
    x0 = np.asarray(x0, dtype=float)
    params = PruneParams(
        kappa_upper=kappa,
        kappa_lower=(1.0 - kappa) if kappa_lower is None else kappa_lower,
        beta=beta,
    )
    outcome = execute_pruning(graph, x0, params, seed)
    pruned = outcome.pruned_graph
    t_exact = budget_bits / (2.0 * bits_per_vector * graph.edge_count)
    iters_reference = math.floor(t_exact)
    iters_pruned = math.floor(t_exact / (1.0 - kappa))
    ref_trace = dist_avg_run(graph, x0, max_iters=iters_reference)
    pruned_trace = dist_avg_run(pruned, x0, max_iters=iters_pruned)
    return BudgetReport(
        budget_bits=float(budget_bits),
        bits_per_vector=float(bits_per_vector),
        kappa=float(kappa),
        edges_reference=graph.edge_count,
        edges_pruned=pruned.edge_count,
        pruned_connected=is_connected(pruned),
        iters_reference=iters_reference,
        iters_pruned=iters_pruned,
        error_reference=ref_trace.consensus_error[-1],
        error_pruned=pruned_trace.consensus_error[-1],
        gap_reference=spectral_gap(metropolis_hastings(graph)),
        gap_pruned=spectral_gap(metropolis_hastings(pruned)),
    )


def save_budget_report(report: BudgetReport, json_path: str) -> None:
    payload = {
        "budget_bits": report.budget_bits,
        "bits_per_vector": report.bits_per_vector,
        "kappa": report.kappa,
        "edges_reference": report.edges_reference,
        "edges_pruned": report.edges_pruned,
        "pruned_connected": report.pruned_connected,
        "iters_reference": report.iters_reference,
        "iters_pruned": report.iters_pruned,
        "error_reference": report.error_reference,
        "error_pruned": report.error_pruned,
        "gap_reference": report.gap_reference,
        "gap_pruned": report.gap_pruned,
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
