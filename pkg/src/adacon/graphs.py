"""Undirected graphs: generation, structural metrics, and edge-list IO."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

INFINITE_DIAMETER = math.inf


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    Edges are stored as a sorted tuple of (i, j) pairs with i < j, which
    makes iteration order deterministic everywhere downstream.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) not allowed")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @staticmethod
    def from_edges(n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        normalized = tuple(sorted((min(i, j), max(i, j)) for i, j in edges))
        return Graph(n, normalized)

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(b)) for b in nbrs)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.neighbor_lists[i]

    def degree(self, i: int) -> int:
        return len(self.neighbor_lists[i])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.neighbor_lists)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        a, b = min(i, j), max(i, j)
        return (a, b) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)


@dataclass(frozen=True)
class GraphMetrics:
    connected: bool
    diameter: float
    max_degree: int
    edge_count: int


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each of the n(n-1)/2 pairs is an edge with probability p.

    Pairs are visited in lexicographic order with one uniform draw each,
    so the edge set is a pure function of (n, p, seed).
    """
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0,1], got {p}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng = np.random.default_rng(seed)
    draws = rng.random(len(pairs))
    edges = tuple(pair for pair, u in zip(pairs, draws) if u < p)
    return Graph(n, edges)


def _bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    return all(d >= 0 for d in _bfs_distances(g, 0))


def diameter(g: Graph) -> float:
    """Longest shortest-path length; INFINITE_DIAMETER if disconnected."""
    if g.n == 1:
        return 0
    worst = 0
    for source in range(g.n):
        dist = _bfs_distances(g, source)
        if any(d < 0 for d in dist):
            return INFINITE_DIAMETER
        worst = max(worst, max(dist))
    return worst


def graph_metrics(g: Graph) -> GraphMetrics:
    d = diameter(g)
    return GraphMetrics(
        connected=d != INFINITE_DIAMETER,
        diameter=d,
        max_degree=max(g.degrees) if g.n else 0,
        edge_count=g.edge_count,
    )


def graph_union(gs: Sequence[Graph]) -> Graph:
    if not gs:
        raise ValueError("graph_union needs at least one graph")
    n = gs[0].n
    for g in gs:
        if g.n != n:
            raise ValueError(f"node count mismatch: {g.n} != {n}")
    merged: set[tuple[int, int]] = set()
    for g in gs:
        merged.update(g.edges)
    return Graph(n, tuple(sorted(merged)))


def save_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={g.n}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def load_edge_list(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"expected 'n=<count>' header, got {header!r}")
        n = int(header[2:])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, j = line.split()
            edges.append((int(i), int(j)))
    return Graph(n, tuple(edges))
