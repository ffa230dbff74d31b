"""Pruning protocol: selection, request exchange, guards, symmetrization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adacon.graphs import Graph, erdos_renyi
from adacon.pruning import (
    GREEDY,
    PruneParams,
    dissimilarity,
    dump_outcome_json,
    execute_pruning,
    node_rng,
    select_candidates,
    softmax_weights,
)

TRIANGLE = Graph(3, ((0, 1), (0, 2), (1, 2)))
# Triangle plus a pendant on node 0.
PAW = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2)))


class TestDissimilarity:
    def test_identical_vectors(self) -> None:
        v = np.array([1.0, -2.0, 3.0])
        assert dissimilarity(v, v) == 0.0

    def test_unit_basis_l1(self) -> None:
        assert dissimilarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 2.0

    def test_hand_sum_l1(self) -> None:
        assert dissimilarity(np.array([0.5, -1.5]), np.array([1.0, 1.0])) == 3.0

    def test_l2_kind(self) -> None:
        assert dissimilarity(np.array([3.0, 0.0]), np.array([0.0, 4.0]), kind="l2") == 5.0

    def test_rejects_shape_mismatch(self) -> None:
        with pytest.raises(ValueError):
            dissimilarity(np.zeros(2), np.zeros(3))

    def test_rejects_unknown_kind(self) -> None:
        with pytest.raises(ValueError):
            dissimilarity(np.zeros(2), np.zeros(2), kind="linf")


class TestPruneParams:
    def test_rejects_threshold_outside_unit_interval(self) -> None:
        with pytest.raises(ValueError):
            PruneParams(kappa_upper=1.5)
        with pytest.raises(ValueError):
            PruneParams(kappa_lower=-0.1)

    def test_rejects_incompatible_thresholds(self) -> None:
        # kappa_lower must leave room for the kappa_upper removals.
        with pytest.raises(ValueError):
            PruneParams(kappa_upper=0.5, kappa_lower=0.75)

    def test_per_node_thresholds_resolve(self) -> None:
        params = PruneParams(kappa_upper=[0.5, 0.0], kappa_lower=[0.5, 1.0])
        up, lo = params.resolved(2)
        assert up.tolist() == [0.5, 0.0]
        assert lo.tolist() == [0.5, 1.0]

    def test_scalar_broadcast(self) -> None:
        up, lo = PruneParams(kappa_upper=0.25).resolved(4)
        assert up.tolist() == [0.25] * 4
        assert lo.tolist() == [0.0] * 4

    def test_rejects_negative_beta(self) -> None:
        with pytest.raises(ValueError):
            PruneParams(beta=-1.0)

    def test_greedy_sentinel_accepted(self) -> None:
        assert PruneParams(beta=GREEDY).beta is GREEDY


class TestSoftmaxWeights:
    def test_beta_zero_is_uniform(self) -> None:
        w = softmax_weights(np.array([0.1, 5.0, 2.0]), beta=0.0)
        assert np.allclose(w, 1 / 3)

    def test_weights_sum_to_one(self) -> None:
        w = softmax_weights(np.array([0.5, 1.5, 9.0]), beta=2.0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_smaller_delta_gets_larger_weight(self) -> None:
        w = softmax_weights(np.array([0.1, 0.2, 0.9]), beta=3.0)
        assert w[0] > w[1] > w[2]

    def test_extreme_scores_do_not_overflow(self) -> None:
        w = softmax_weights(np.array([0.0, 1000.0]), beta=10.0)
        assert w[0] == pytest.approx(1.0)
        assert w[1] == 0.0


class TestSelectCandidates:
    def test_zero_budget_returns_empty(self) -> None:
        rng = node_rng(0, 0, 0)
        estimates = np.zeros((4, 2))
        assert select_candidates(0, estimates, (1, 2, 3), PruneParams(), rng, 0.0) == frozenset()

    def test_greedy_takes_smallest_dissimilarities(self) -> None:
        # Node 0 against neighbors {2,3,4} with deltas {0.1, 0.5, 0.9};
        # budget floor(2/3 * 3) = 2 picks the two closest.
        estimates = np.array([[0.0], [99.0], [0.1], [0.5], [0.9]])
        rng = node_rng(0, 0, 0)
        params = PruneParams(beta=GREEDY)
        chosen = select_candidates(0, estimates, (2, 3, 4), params, rng, 2 / 3)
        assert chosen == frozenset({2, 3})

    def test_greedy_breaks_ties_by_neighbor_index(self) -> None:
        estimates = np.array([[0.0], [1.0], [1.0], [1.0]])
        rng = node_rng(0, 0, 0)
        params = PruneParams(beta=GREEDY)
        chosen = select_candidates(0, estimates, (1, 2, 3), params, rng, 2 / 3)
        assert chosen == frozenset({1, 2})

    def test_budget_is_exact(self) -> None:
        rng_data = np.random.default_rng(17)
        estimates = rng_data.standard_normal((8, 3))
        for kappa in (0.0, 0.3, 0.5, 0.99, 1.0):
            chosen = select_candidates(
                0,
                estimates,
                tuple(range(1, 8)),
                PruneParams(beta=1.0, kappa_upper=kappa, kappa_lower=0.0),
                node_rng(4, 0, 0),
                kappa,
            )
            assert len(chosen) == math.floor(kappa * 7)

    def test_beta_zero_subsets_uniform(self) -> None:
        # Chi-square against uniform over the C(4,2)=6 subsets, 1e5
        # draws: each count within 3 standard errors of the mean.
        estimates = np.array([[0.0], [0.3], [0.9], [2.7], [8.1]])
        neighbors = (1, 2, 3, 4)
        params = PruneParams(beta=0.0)
        counts: dict[frozenset, int] = {}
        trials = 100_000
        for t in range(trials):
            chosen = select_candidates(0, estimates, neighbors, params, node_rng(1, 0, t), 0.5)
            counts[chosen] = counts.get(chosen, 0) + 1
        assert len(counts) == 6
        expected = trials / 6
        se = math.sqrt(trials * (1 / 6) * (5 / 6))
        for subset, count in counts.items():
            assert abs(count - expected) <= 3 * se, (subset, count)


class TestExecutePruning:
    def test_kappa_zero_is_identity(self) -> None:
        g = erdos_renyi(10, 0.5, seed=3)
        outcome = execute_pruning(g, np.zeros((10, 2)), PruneParams(), seed=0)
        assert outcome.pruned_graph.edges == g.edges
        assert outcome.removed_count == 0
        assert not outcome.executed

    def test_two_nodes_mutual_removal_empties_graph(self) -> None:
        g = Graph(2, ((0, 1),))
        params = PruneParams(kappa_upper=1.0, kappa_lower=0.0)
        outcome = execute_pruning(g, np.array([[0.0], [1.0]]), params, seed=0)
        assert outcome.pruned_graph.edges == ()
        assert outcome.removed_count == 1

    def test_retention_guard_blocks_request(self) -> None:
        # Only node 0 nominates; node 1's floor of ceil(1*2)=2 surviving
        # edges refuses the request, and ADD symmetrization keeps the edge.
        params = PruneParams(kappa_upper=[0.5, 0.0, 0.0], kappa_lower=[0.5, 1.0, 1.0])
        estimates = np.array([[0.0], [1.0], [2.0]])
        outcome = execute_pruning(TRIANGLE, estimates, params, seed=0)
        assert outcome.pruned_graph.edges == TRIANGLE.edges
        assert len(outcome.candidates[0]) == 1
        assert outcome.removed_count == 0

    def test_paw_prunes_to_star(self) -> None:
        # Greedy nominations: node 0 -> 1, node 1 -> 2, node 2 -> 1.
        # The mutual 1<->2 pair dies in step (i); node 1's floor of
        # ceil(0.5*2)=1 refuses node 0's request, so (0,1) survives.
        params = PruneParams(kappa_upper=0.5, kappa_lower=0.5, beta=GREEDY)
        estimates = np.array([[0.0], [1.0], [1.01], [5.0]])
        outcome = execute_pruning(PAW, estimates, params, seed=0)
        assert outcome.pruned_graph.edges == ((0, 1), (0, 2), (0, 3))
        assert outcome.removed_count == 1

    def test_remove_symmetrization_drops_unilateral_edges(self) -> None:
        # Same setup as the star case, but REMOVE also kills (0,1):
        # node 0 dropped it in step (i) even though node 1 refused.
        params = PruneParams(kappa_upper=0.5, kappa_lower=0.5, beta=GREEDY, symmetrize="remove")
        estimates = np.array([[0.0], [1.0], [1.01], [5.0]])
        outcome = execute_pruning(PAW, estimates, params, seed=0)
        assert outcome.pruned_graph.edges == ((0, 2), (0, 3))
        assert outcome.removed_count == 2

    def test_isolated_node_is_skipped(self) -> None:
        g = Graph(3, ((0, 1),))
        params = PruneParams(kappa_upper=1.0, kappa_lower=0.0)
        outcome = execute_pruning(g, np.zeros((3, 1)), params, seed=0)
        assert outcome.candidates[2] == frozenset()

    def test_determinism_per_seed_and_cycle(self) -> None:
        g = erdos_renyi(12, 0.5, seed=1)
        estimates = np.random.default_rng(8).standard_normal((12, 4))
        params = PruneParams(kappa_upper=0.5, kappa_lower=0.5, beta=1.0)
        a = execute_pruning(g, estimates, params, seed=5, cycle=3)
        b = execute_pruning(g, estimates, params, seed=5, cycle=3)
        assert a.pruned_graph.edges == b.pruned_graph.edges
        assert a.candidates == b.candidates
        c = execute_pruning(g, estimates, params, seed=5, cycle=4)
        assert c.pruned_graph.edges != a.pruned_graph.edges or c.candidates != a.candidates

    def test_candidate_budgets_exact_on_random_graph(self) -> None:
        g = erdos_renyi(15, 0.6, seed=2)
        estimates = np.random.default_rng(9).standard_normal((15, 2))
        params = PruneParams(kappa_upper=0.4, kappa_lower=0.6, beta=2.0)
        outcome = execute_pruning(g, estimates, params, seed=3)
        for i in range(g.n):
            assert len(outcome.candidates[i]) == math.floor(0.4 * g.degree(i))

    @given(
        seed=st.integers(min_value=0, max_value=1000),
        kappa=st.floats(min_value=0.0, max_value=1.0),
        greedy=st.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_pruned_edges_subset_of_original(self, seed: int, kappa: float, greedy: bool) -> None:
        g = erdos_renyi(10, 0.5, seed=seed)
        estimates = np.random.default_rng(seed).standard_normal((10, 3))
        params = PruneParams(
            kappa_upper=kappa,
            kappa_lower=1.0 - kappa,
            beta=GREEDY if greedy else 1.0,
        )
        outcome = execute_pruning(g, estimates, params, seed=seed)
        assert set(outcome.pruned_graph.edges) <= set(g.edges)
        assert outcome.removed_count == g.edge_count - outcome.pruned_graph.edge_count
        for i, j in outcome.pruned_graph.edges:
            assert i < j


def test_node_rng_streams_are_independent() -> None:
    a = node_rng(0, 1, 2).random(4)
    b = node_rng(0, 1, 2).random(4)
    c = node_rng(0, 2, 2).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_outcome_json_dump(tmp_path) -> None:
    import json

    params = PruneParams(kappa_upper=0.5, kappa_lower=0.5, beta=GREEDY)
    estimates = np.array([[0.0], [1.0], [1.01], [5.0]])
    outcome = execute_pruning(PAW, estimates, params, seed=0)
    path = str(tmp_path / "outcome.json")
    dump_outcome_json(outcome, path)
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    assert payload["removed_count"] == 1
    assert payload["pruned_edges"] == [[0, 1], [0, 2], [0, 3]]
