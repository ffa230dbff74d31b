"""Theory oracles: envelope check, step-size machinery, budget shootout."""

import json
import math

import numpy as np
import pytest

from adacon.algorithms import Algorithm, RunConfig, ac_run, dist_avg_run
from adacon.analysis import (
    EnvelopeParams,
    window_unions_connected,
    budget_comparison,
    compute_rho_prime,
    certified_eta,
    measure_tau_bar,
    save_budget_report,
    save_envelope_report,
    suggest_step_size,
    theorem1_envelope,
)
from adacon.graphs import Graph, diameter, erdos_renyi, is_connected
from adacon.mixing import metropolis_hastings
from adacon.pruning import GREEDY, PruneParams

PATH3_Q = np.array(
    [
        [2 / 3, 1 / 3, 0.0],
        [1 / 3, 1 / 3, 1 / 3],
        [0.0, 1 / 3, 2 / 3],
    ]
)
K4 = Graph(4, tuple((i, j) for i in range(4) for j in range(i + 1, 4)))
PAW = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2)))


def connected_er(n: int, p: float, seed: int) -> Graph:
    for attempt in range(64):
        g = erdos_renyi(n, p, seed + 7919 * attempt)
        if is_connected(g):
            return g
    raise AssertionError("no connected sample found")


class TestEnvelopeParams:
    def test_gamma_split(self) -> None:
        params = EnvelopeParams(q=0.25, tau_bar=1, d_g=1)
        assert params.gamma_envelope == 0.75
        assert params.q_window == 0.25

    def test_window_scales_exponent(self) -> None:
        params = EnvelopeParams(q=0.5, tau_bar=2, d_g=3)
        assert params.q_window == pytest.approx(0.5**6)

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            EnvelopeParams(q=0.0, tau_bar=1, d_g=1)
        with pytest.raises(ValueError):
            EnvelopeParams(q=1.0, tau_bar=1, d_g=1)
        with pytest.raises(ValueError):
            EnvelopeParams(q=0.5, tau_bar=0, d_g=1)
        with pytest.raises(ValueError):
            EnvelopeParams(q=0.5, tau_bar=1, d_g=0)


class TestAssumptionWindow:
    def test_static_connected_holds_any_window(self) -> None:
        g = connected_er(8, 0.5, seed=0)
        assert window_unions_connected([g] * 5, 1)
        assert window_unions_connected([g] * 5, 3)

    def test_alternating_fragments_need_window_two(self) -> None:
        left = Graph(3, ((0, 1),))
        right = Graph(3, ((1, 2),))
        seq = [left, right, left, right]
        assert not window_unions_connected(seq, 1)
        assert window_unions_connected(seq, 2)
        assert measure_tau_bar(seq) == 2

    def test_short_sequence_uses_full_union(self) -> None:
        left = Graph(3, ((0, 1),))
        right = Graph(3, ((1, 2),))
        assert window_unions_connected([left, right], 4)

    def test_static_connected_measures_one(self) -> None:
        assert measure_tau_bar([connected_er(6, 0.6, seed=1)] * 3) == 1

    def test_never_connected_raises(self) -> None:
        with pytest.raises(ValueError):
            measure_tau_bar([Graph(3, ((0, 1),))] * 4)


class TestTheorem1Envelope:
    def test_one_step_consensus_has_infinite_margin(self) -> None:
        # Perfect averaging on the complete graph zeroes the deviation
        # after one iteration.
        x0 = np.random.default_rng(0).standard_normal((4, 2))
        trace = dist_avg_run(K4, x0, max_iters=3)
        report = theorem1_envelope(trace, EnvelopeParams(q=0.25, tau_bar=1, d_g=1))
        assert report.holds
        assert report.assumption_ok
        assert report.margins[0] == pytest.approx(4**1.5)
        assert np.all(np.isinf(report.margins[1:]))

    def test_bound_at_k_zero_always_holds(self) -> None:
        g = connected_er(6, 0.5, seed=2)
        trace = dist_avg_run(g, np.random.default_rng(2).standard_normal((6, 2)), max_iters=0)
        report = theorem1_envelope(
            trace, EnvelopeParams(q=0.2, tau_bar=1, d_g=int(diameter(g)))
        )
        assert report.holds
        assert report.margins[0] >= 1.0

    def test_refreshed_runs_never_violate(self) -> None:
        # With a refresh every cycle the run mixes on the reference
        # graph, so the hypotheses hold by construction.
        for seed in range(3):
            g = connected_er(12, 0.5, seed)
            cfg = RunConfig(
                algorithm=Algorithm.AC,
                graph=g,
                prune_params=PruneParams(kappa_upper=0.5, kappa_lower=0.5, beta=1.0),
                tau=5,
                refresh_period=1,
                max_iters=60,
                seed=seed,
            )
            trace = ac_run(cfg, np.random.default_rng(seed).standard_normal((12, 3)))
            params = EnvelopeParams(
                q=1.0 / (1.0 + max(g.degrees)), tau_bar=1, d_g=int(diameter(g))
            )
            report = theorem1_envelope(trace, params)
            assert report.holds
            assert report.assumption_ok
            assert report.min_margin >= 1.0

    def test_disconnected_cycles_fail_assumption(self) -> None:
        # kappa=1 on two nodes empties the graph at the first pruning
        # event; the deviation then stalls above the shrinking bound.
        g = Graph(2, ((0, 1),))
        cfg = RunConfig(
            algorithm=Algorithm.AC,
            graph=g,
            prune_params=PruneParams(kappa_upper=1.0, kappa_lower=0.0),
            tau=2,
            max_iters=30,
            seed=0,
        )
        trace = ac_run(cfg, np.array([[0.0], [1.0]]))
        report = theorem1_envelope(trace, EnvelopeParams(q=0.5, tau_bar=1, d_g=1))
        assert not report.assumption_ok
        assert not report.holds
        assert len(report.violations) > 0

    def test_report_files(self, tmp_path) -> None:
        trace = dist_avg_run(K4, np.random.default_rng(3).standard_normal((4, 2)), max_iters=3)
        report = theorem1_envelope(trace, EnvelopeParams(q=0.25, tau_bar=1, d_g=1))
        csv_path = tmp_path / "envelope.csv"
        json_path = tmp_path / "envelope.json"
        save_envelope_report(report, str(csv_path), str(json_path))
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "k,actual,bound,margin"
        assert len(lines) == len(report.actual) + 1
        summary = json.loads(json_path.read_text())
        assert summary["holds"] is True
        assert summary["violations"] == []


class TestRhoPrime:
    def test_perfect_averaging_gives_zero(self) -> None:
        seq = [np.full((3, 3), 1 / 3)] * 4
        assert compute_rho_prime(seq, 4, 2) == pytest.approx(0.0, abs=1e-18)

    def test_path_window_one(self) -> None:
        seq = [PATH3_Q] * 4
        assert compute_rho_prime(seq, 4, 1) == pytest.approx(16 / 9, rel=1e-9)

    def test_path_window_six(self) -> None:
        # 2 * 37 * ((2/3)^6)^2 exactly.
        seq = [PATH3_Q] * 6
        expected = 2 * 37 * (2 / 3) ** 12
        assert compute_rho_prime(seq, 6, 6) == pytest.approx(expected, rel=1e-9)

    def test_window_validation(self) -> None:
        seq = [PATH3_Q] * 3
        with pytest.raises(ValueError):
            compute_rho_prime(seq, 3, 0)
        with pytest.raises(ValueError):
            compute_rho_prime(seq, 2, 3)
        with pytest.raises(ValueError):
            compute_rho_prime(seq, 5, 1)

    def test_deviation_factor_shrinks_with_window(self) -> None:
        # For a constant ergodic Q the windowed deviation is (1-gap)^w,
        # so rho' / (2(1+w^2)) is strictly decreasing in w.
        seq = [PATH3_Q] * 10
        factors = [
            compute_rho_prime(seq, 10, w) / (2 * (1 + w**2)) for w in range(1, 11)
        ]
        assert all(a > b for a, b in zip(factors, factors[1:]))


class TestStepSize:
    def test_eta_on_k4_is_178(self) -> None:
        params = EnvelopeParams(q=0.25, tau_bar=1, d_g=1)
        assert certified_eta(params, n=4) == 178

    def test_eta_monotone_in_q(self) -> None:
        small_q = certified_eta(EnvelopeParams(q=0.1, tau_bar=1, d_g=1), n=4)
        large_q = certified_eta(EnvelopeParams(q=0.4, tau_bar=1, d_g=1), n=4)
        assert small_q > large_q

    def test_certified_mode_uses_quarter_cap(self) -> None:
        params = EnvelopeParams(q=0.25, tau_bar=1, d_g=1)
        report = suggest_step_size(params, n=4, smoothness=2.0)
        assert report.eta == 178
        assert report.tau_eta == 178
        assert report.tau_hat == 178
        assert report.rho_prime == 0.25
        assert report.admissible
        assert report.alpha_max == pytest.approx(
            math.sqrt(0.25) / (58 * 2.0 * 178**2)
        )

    def test_empirical_mode_finds_minimal_window(self) -> None:
        # On the constant path sequence the smallest admissible window
        # is 8: 2*(1+64)*(2/3)^16 < 1/4 while window 7 is still above.
        seq = [PATH3_Q] * 12
        params = EnvelopeParams(q=1 / 3, tau_bar=1, d_g=2)
        report = suggest_step_size(params, n=3, smoothness=1.0, q_seq=seq)
        assert report.tau_hat == 8
        assert report.rho_prime == pytest.approx(2 * 65 * (2 / 3) ** 16, rel=1e-9)
        assert report.rho_prime < 0.25
        assert report.admissible
        assert 0.0 < report.alpha_max < 1.0

    def test_short_sequence_reported_inadmissible(self) -> None:
        seq = [PATH3_Q] * 4
        params = EnvelopeParams(q=1 / 3, tau_bar=1, d_g=2)
        report = suggest_step_size(params, n=3, smoothness=1.0, q_seq=seq)
        assert not report.admissible
        # Window 4 has the smallest rho' among the feasible windows.
        assert report.tau_hat == 4

    def test_certified_claim_against_realized_sequence(self) -> None:
        # The certified window must satisfy the quarter cap on the
        # matrices the run actually used.
        g = PAW
        q = metropolis_hastings(g)
        params = EnvelopeParams(
            q=1.0 / (1.0 + max(g.degrees)), tau_bar=1, d_g=int(diameter(g))
        )
        report = suggest_step_size(params, n=g.n, smoothness=1.0)
        seq = [q.q] * report.tau_eta
        realized = compute_rho_prime(seq, report.tau_eta, report.tau_hat)
        assert realized < 0.25

    def test_rejects_nonpositive_smoothness(self) -> None:
        params = EnvelopeParams(q=0.25, tau_bar=1, d_g=1)
        with pytest.raises(ValueError):
            suggest_step_size(params, n=4, smoothness=0.0)


class TestBudgetComparison:
    def test_paw_to_star_hand_trace(self) -> None:
        # Greedy pruning at kappa=0.5 removes exactly the (1,2) edge;
        # the star and the paw share the spectral gap 1/4 exactly, so
        # the extra pruned iterations strictly help.
        x0 = np.array([[0.0], [1.0], [1.01], [5.0]])
        report = budget_comparison(
            PAW, kappa=0.5, budget_bits=3200.0, bits_per_vector=100.0, x0=x0, seed=0
        )
        assert report.iters_reference == 4
        assert report.iters_pruned == 8
        assert report.edges_reference == 4
        assert report.edges_pruned == 3
        assert report.pruned_connected
        assert report.gap_reference == pytest.approx(0.25, abs=1e-12)
        assert report.gap_pruned == pytest.approx(0.25, abs=1e-12)
        assert report.error_pruned < report.error_reference

    def test_kappa_zero_runs_identical(self) -> None:
        g = connected_er(10, 0.5, seed=4)
        x0 = np.random.default_rng(4).standard_normal((10, 2))
        report = budget_comparison(
            g, kappa=0.0, budget_bits=8000.0, bits_per_vector=10.0, x0=x0, seed=4
        )
        assert report.edges_pruned == report.edges_reference
        assert report.iters_pruned == report.iters_reference
        assert report.error_pruned == report.error_reference
        assert report.gap_pruned == report.gap_reference

    def test_median_pruned_error_not_worse(self) -> None:
        # Monte-Carlo across 20 seeds on dense G(32,0.8).
        gaps = []
        for seed in range(20):
            g = connected_er(32, 0.8, seed)
            x0 = np.random.default_rng(seed + 500).standard_normal((32, 4))
            budget = 12 * 2 * 64.0 * g.edge_count
            report = budget_comparison(
                g, kappa=0.5, budget_bits=budget, bits_per_vector=64.0, x0=x0, seed=seed
            )
            assert report.iters_reference == 12
            assert report.iters_pruned == 24
            gaps.append(report.error_pruned - report.error_reference)
        assert np.median(gaps) <= 0.0

    def test_validation(self) -> None:
        x0 = np.zeros((4, 1))
        with pytest.raises(ValueError):
            budget_comparison(PAW, kappa=1.0, budget_bits=100.0, bits_per_vector=1.0, x0=x0, seed=0)
        with pytest.raises(ValueError):
            budget_comparison(PAW, kappa=0.5, budget_bits=0.0, bits_per_vector=1.0, x0=x0, seed=0)

    def test_report_json(self, tmp_path) -> None:
        x0 = np.array([[0.0], [1.0], [1.01], [5.0]])
        report = budget_comparison(
            PAW, kappa=0.5, budget_bits=3200.0, bits_per_vector=100.0, x0=x0, seed=0
        )
        path = tmp_path / "budget.json"
        save_budget_report(report, str(path))
        payload = json.loads(path.read_text())
        assert payload["edges_pruned"] == 3
        assert payload["iters_pruned"] == 8
        assert payload["pruned_connected"] is True
