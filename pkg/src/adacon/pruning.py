"""Randomized edge-pruning protocol with dissimilarity-weighted selection.

The protocol has four phases per cycle: every node draws removal
candidates from its own edges (softmax over estimate dissimilarity),
drops those edges locally, then processes incoming removal requests
subject to a lower-degree guard, and finally the directed survivors are
symmetrized back into an undirected graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .graphs import Graph


class _Greedy:
    """Sentinel for the zero-temperature limit of the softmax selection."""

    _instance = None

    def __new__(cls) -> "_Greedy":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "GREEDY"


GREEDY = _Greedy()
Beta = Union[float, _Greedy]

# exp(-x) underflows to exactly 0 near x=745; anything past 700 is a
# probability-zero tail for selection purposes.
_EXP_CUTOFF = 700.0


def dissimilarity(a: np.ndarray, b: np.ndarray, kind: str = "l1") -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if kind == "l1":
        return float(np.abs(a - b).sum())
    if kind == "l2":
        return float(np.linalg.norm(a - b))
    raise ValueError(f"unknown dissimilarity kind {kind!r}")


def _broadcast(value: Union[float, Sequence[float]], n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or length-{n} sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PruneParams:
    """Per-node retention thresholds and selection temperature.

    kappa_upper bounds the fraction of a node's edges it may nominate
    for removal; kappa_lower is the guarded floor below which a node
    refuses incoming removal requests. Scalars broadcast to all nodes.
    """

    kappa_upper: Union[float, Sequence[float]] = 0.0
    kappa_lower: Union[float, Sequence[float]] = 0.0
    beta: Beta = 1.0
    dissimilarity: str = "l1"
    symmetrize: str = "add"

    def __post_init__(self) -> None:
        if self.dissimilarity not in ("l1", "l2"):
            raise ValueError(f"unknown dissimilarity kind {self.dissimilarity!r}")
        if self.symmetrize not in ("add", "remove"):
            raise ValueError(f"symmetrize must be 'add' or 'remove', got {self.symmetrize!r}")
        if not isinstance(self.beta, _Greedy):
            beta = float(self.beta)
            if not (beta >= 0.0 and math.isfinite(beta)):
                raise ValueError(f"beta must be a finite nonnegative real or GREEDY, got {beta}")
        up = np.atleast_1d(np.asarray(self.kappa_upper, dtype=float))
        lo = np.atleast_1d(np.asarray(self.kappa_lower, dtype=float))
        if up.min() < 0 or up.max() > 1 or lo.min() < 0 or lo.max() > 1:
            raise ValueError("kappa thresholds must lie in [0,1]")
        if up.shape == lo.shape or up.size == 1 or lo.size == 1:
            if np.any(lo > 1.0 - up + 1e-15):
                raise ValueError("kappa_lower must satisfy kappa_lower <= 1 - kappa_upper per node")
        else:
            raise ValueError("kappa_upper and kappa_lower lengths disagree")

    def resolved(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            _broadcast(self.kappa_upper, n, "kappa_upper"),
            _broadcast(self.kappa_lower, n, "kappa_lower"),
        )


@dataclass(frozen=True)
class PruneOutcome:
    pruned_graph: Graph
    candidates: Mapping[int, frozenset[int]]
    removed_count: int
    # False only for the kappa_upper=0 identity short-circuit, where no
    # estimates were exchanged and nothing should be charged.
    executed: bool = True


def softmax_weights(deltas: np.ndarray, beta: float) -> np.ndarray:
    """Selection distribution p_j proportional to exp(-beta * delta_j)."""
    scores = beta * np.asarray(deltas, dtype=float)
    scores = scores - scores.min()
    weights = np.where(scores > _EXP_CUTOFF, 0.0, np.exp(-scores))
    return weights / weights.sum()


def select_candidates(
    i: int,
    estimates: np.ndarray,
    neighbors: Sequence[int],
    params: PruneParams,
    rng: np.random.Generator,
    kappa_upper_i: float,
) -> frozenset[int]:
    """Pick floor(kappa_upper * degree) neighbors to nominate for removal.

    Draws are sequential without replacement with the softmax
    re-normalized over the remaining neighbors; GREEDY takes the
    smallest dissimilarities with ties broken by neighbor index.
    """
    degree = len(neighbors)
    budget = int(math.floor(kappa_upper_i * degree))
    if budget == 0 or degree == 0:
        return frozenset()
    deltas = np.array(
        [dissimilarity(estimates[i], estimates[j], params.dissimilarity) for j in neighbors]
    )
    if isinstance(params.beta, _Greedy):
        order = sorted(range(degree), key=lambda idx: (deltas[idx], neighbors[idx]))
        return frozenset(neighbors[idx] for idx in order[:budget])
    remaining = list(neighbors)
    remaining_deltas = list(deltas)
    chosen: list[int] = []
    for _ in range(budget):
        weights = softmax_weights(np.array(remaining_deltas), float(params.beta))
        pick = int(np.searchsorted(np.cumsum(weights), rng.random(), side="right"))
        # Cumsum can fall a few ulps short of 1.0; clamp the overflow bin.
        pick = min(pick, len(remaining) - 1)
        chosen.append(remaining.pop(pick))
        remaining_deltas.pop(pick)
    return frozenset(chosen)


def node_rng(seed: int, node: int, cycle: int) -> np.random.Generator:
    """Independent substream per (seed, node, cycle); evaluation order cannot matter."""
    return np.random.default_rng([seed, node, cycle])


def execute_pruning(
    g: Graph,
    estimates: np.ndarray,
    params: PruneParams,
    seed: int,
    cycle: int = 0,
) -> PruneOutcome:
    n = g.n
    kappa_upper, kappa_lower = params.resolved(n)
    if np.all(kappa_upper == 0.0):
        # Nothing can be nominated; the protocol is the identity.
        return PruneOutcome(pruned_graph=g, candidates={}, removed_count=0, executed=False)

    estimates = np.asarray(estimates, dtype=float)
    candidates: dict[int, frozenset[int]] = {}
    for i in range(n):
        nbrs = g.neighbors(i)
        if not nbrs:
            candidates[i] = frozenset()
            continue
        candidates[i] = select_candidates(
            i, estimates, nbrs, params, node_rng(seed, i, cycle), kappa_upper[i]
        )

    # Step (i): every node drops its own candidates unconditionally.
    surviving: list[set[int]] = [set(g.neighbors(i)) for i in range(n)]
    for i in range(n):
        surviving[i] -= candidates[i]

    # Step (ii): incoming requests, ascending requester index, guarded by
    # the retention floor. Requests for edges the node itself nominated
    # were already handled in step (i).
    for i in range(n):
        degree = g.degree(i)
        floor_i = math.ceil(kappa_lower[i] * degree)
        nbrs = set(g.neighbors(i))
        requesters = sorted(
            j for j in nbrs if i in candidates.get(j, frozenset()) and j not in candidates[i]
        )
        for j in requesters:
            if len(surviving[i]) > floor_i and j in surviving[i]:
                surviving[i].discard(j)

    # Symmetrization: ADD keeps an edge if either direction survived,
    # REMOVE keeps it only if both did.
    edges: set[tuple[int, int]] = set()
    for i, j in g.edges:
        keep_i = j in surviving[i]
        keep_j = i in surviving[j]
        keep = (keep_i or keep_j) if params.symmetrize == "add" else (keep_i and keep_j)
        if keep:
            edges.add((i, j))

    pruned = Graph(n, tuple(sorted(edges)))
    return PruneOutcome(
        pruned_graph=pruned,
        candidates=candidates,
        removed_count=g.edge_count - pruned.edge_count,
    )


def dump_outcome_json(outcome: PruneOutcome, path: str) -> None:
    payload = {
        "n": outcome.pruned_graph.n,
        "pruned_edges": [list(e) for e in outcome.pruned_graph.edges],
        "candidates": {str(i): sorted(c) for i, c in outcome.candidates.items()},
        "removed_count": outcome.removed_count,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
