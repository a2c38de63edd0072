"""Water-filling, query realization, selective focus, and the bound suite."""

import numpy as np
import pytest

from idealpoint import (
    GAMMA,
    GaussianBelief,
    Query,
    Response,
    ValidationError,
    greedy_direction,
    hedging_gap,
    k2_plan,
    kalman_update,
    r2_ratio,
    realize_queries,
    solicitation_lower_bound,
    thresholds_and_ratios,
    vos,
    waterfill,
)

from oracles import (
    best_grid_allocation_trace,
    best_single_query_trace,
    k2_profile_search,
    random_sequence_traces,
    two_point_distortion,
)

TWO_OVER_PI = 2.0 / np.pi


class TestGreedyDirection:
    def test_anisotropic_gain(self):
        q, gain = greedy_direction(np.diag([4.0, 1.0]), 1.0)
        np.testing.assert_allclose(q.direction, [1.0, 0.0], atol=1e-12)
        assert abs(gain - 1.6) < 1e-12

    def test_matches_dense_angle_scan(self):
        cov = np.array([[4.0, 1.2], [1.2, 1.0]])
        _, gain = greedy_direction(cov, 1.0)
        angles = np.linspace(0.0, np.pi, 3601)
        ys = np.column_stack([np.cos(angles), np.sin(angles)])
        sig_y = ys @ cov
        num = 0.5 * np.einsum("ij,ij->i", sig_y, sig_y)
        den = 1.0 + np.einsum("ij,ij->i", ys, sig_y)
        assert gain >= (num / den).max() - 1e-9

    def test_isotropic_gain(self):
        for nv in (0.5, 1.0, 2.0):
            _, gain = greedy_direction(np.eye(3), nv)
            assert abs(gain - 1.0 / (2.0 * (nv + 1.0))) < 1e-12

    def test_gain_even_in_direction(self):
        cov = np.array([[4.0, 1.2], [1.2, 1.0]])
        q, _ = greedy_direction(cov, 1.0)
        y = q.direction

        def delta(v):
            return 0.5 * float(v @ cov @ cov @ v) / (1.0 + float(v @ cov @ v))

        assert delta(y) == delta(-y)


class TestWaterfill:
    def test_single_query(self):
        plan = waterfill(np.diag([4.0, 1.0]), 1, 1.0)
        assert plan.active_rank == 1
        assert abs(plan.common_level - 0.8) < 1e-12
        np.testing.assert_allclose(plan.allocations, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(plan.posterior_eigs, [0.8, 1.0], atol=1e-12)

    def test_three_queries(self):
        plan = waterfill(np.diag([4.0, 1.0]), 3, 1.0)
        assert plan.active_rank == 2
        assert abs(plan.common_level - 2.0 / 4.25) < 1e-12
        np.testing.assert_allclose(plan.allocations, [1.875, 1.125], atol=1e-12)

    def test_isotropic_ten_dims(self):
        plan = waterfill(np.eye(10), 5, 1.0)
        assert plan.active_rank == 5
        assert abs(plan.common_level - 0.5) < 1e-12
        assert abs(plan.posterior_eigs.sum() - 7.5) < 1e-12

    def test_zero_budget_returns_prior(self):
        plan = waterfill(np.diag([4.0, 1.0]), 0, 1.0)
        assert plan.active_rank == 0
        np.testing.assert_allclose(plan.allocations, 0.0)
        np.testing.assert_allclose(plan.posterior_eigs, [4.0, 1.0])

    def test_beats_simplex_grid_and_single_query_scan(self):
        for prior_eigs, m in (((4.0, 1.0), 1), ((4.0, 1.0), 3)):
            plan = waterfill(np.diag(prior_eigs), m, 1.0)
            wf_trace = float(plan.posterior_eigs.sum())
            assert wf_trace <= best_grid_allocation_trace(prior_eigs, m, 1.0) + 1e-9
        plan = waterfill(np.diag([4.0, 1.0]), 1, 1.0)
        assert float(plan.posterior_eigs.sum()) <= best_single_query_trace(np.diag([4.0, 1.0]), 1.0) + 1e-9

    def test_off_basis_prior(self):
        rng = np.random.default_rng(8)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        prior = q @ np.diag([5.0, 2.0, 0.5]) @ q.T
        plan = waterfill(prior, 4, 1.0)
        # reconstruct the posterior and verify against the information form
        ys = realize_queries(plan, 4)
        info = np.linalg.inv(prior) + sum(np.outer(y.direction, y.direction) for y in ys)
        post = np.linalg.inv(info)
        np.testing.assert_allclose(np.trace(post), plan.posterior_eigs.sum(), rtol=1e-10)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            waterfill(np.diag([4.0, 1.0]), -1, 1.0)
        with pytest.raises(ValidationError):
            waterfill(np.diag([4.0, 1.0]), 1, 0.0)
        with pytest.raises(ValidationError):
            waterfill(np.diag([4.0, 0.0]), 1, 1.0)


class TestRealizeQueries:
    def test_single_allocation_is_leading_eigenvector(self):
        plan = waterfill(np.diag([4.0, 1.0]), 1, 1.0)
        (q,) = realize_queries(plan, 1)
        np.testing.assert_allclose(np.abs(q.direction), [1.0, 0.0], atol=1e-12)

    def test_two_one_split_over_three_queries(self):
        plan = waterfill(np.diag([9.0, 1.0]), 3, 1.0)
        target = np.diag(plan.allocations)
        qs = realize_queries(plan, 3)
        m_hat = sum(np.outer(q.direction, q.direction) for q in qs)
        np.testing.assert_allclose(plan.eigenbasis.T @ m_hat @ plan.eigenbasis, target, atol=1e-8)

    def test_uniform_allocation_gives_basis(self):
        plan = waterfill(np.eye(4), 4, 1.0)
        qs = realize_queries(plan, 4)
        dirs = np.array([q.direction for q in qs])
        np.testing.assert_allclose(np.abs(dirs), np.eye(4), atol=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_reconstruction_fidelity_random_priors(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 6))
        m = int(rng.integers(1, 9))
        q_mat, _ = np.linalg.qr(rng.standard_normal((d, d)))
        prior = q_mat @ np.diag(rng.uniform(0.3, 5.0, size=d)) @ q_mat.T
        plan = waterfill(prior, m, float(rng.uniform(0.3, 2.0)))
        qs = realize_queries(plan, m)
        assert len(qs) == m
        for q in qs:
            assert abs(np.linalg.norm(q.direction) - 1.0) <= 1e-12
        m_hat = sum(np.outer(q.direction, q.direction) for q in qs)
        recon = plan.eigenbasis.T @ m_hat @ plan.eigenbasis
        assert np.linalg.norm(recon - np.diag(plan.allocations)) < 1e-8

    def test_infeasible_trace_rejected(self):
        plan = waterfill(np.diag([4.0, 1.0]), 3, 1.0)
        with pytest.raises(ValidationError):
            realize_queries(plan, 2)


class TestK2Plan:
    def test_below_dimension_equals_waterfill(self):
        profile = k2_plan(1.0, 3, 2, 1.0)
        wf = np.sort(waterfill(np.eye(3), 2, 1.0).posterior_eigs)[::-1]
        np.testing.assert_allclose(profile, wf, atol=1e-12)

    def test_locked_ratio_at_d2(self):
        profile = k2_plan(1.0, 2, 2, 1.0)  # m_hat ~ 0.659 < m
        assert abs(profile[0] / profile[1] - 1.0 / GAMMA) < 1e-12

    def test_transitional_ratio(self):
        profile = k2_plan(1.0, 5, 5, 10.0)  # m_hat ~ 26.3 > m >= d
        assert abs(profile[0] / profile[-1] - 1.125) < 1e-12
        assert abs(profile[0] - 1.0) < 1e-12  # leading direction left unqueried

    def test_precision_budget_respected(self):
        for (d, m, pv, nv) in ((2, 2, 1.0, 1.0), (3, 9, 0.5, 2.0), (5, 40, 1.0, 1.0)):
            profile = k2_plan(pv, d, m, nv)
            lhs = np.sum(1.0 / profile)
            rhs = d / pv + m / nv
            assert abs(lhs - rhs) < 1e-8 * rhs

    def test_continuity_at_crossover(self):
        # transitional and locked formulas agree where they meet
        d, pv, nv = 4, 1.0, 1.0
        m_hat = (1.0 - GAMMA) / GAMMA * (d - 1) * nv / pv
        lam_rest_trans = 1.0 / (1.0 / pv + m_hat / ((d - 1) * nv))
        lam_rest_lock = (GAMMA + d - 1) / (d / pv + m_hat / nv)
        assert abs(lam_rest_trans - lam_rest_lock) < 1e-12

    def test_rejects_unsupported_inputs(self):
        with pytest.raises(ValidationError):
            k2_plan(1.0, 1, 3, 1.0)
        with pytest.raises(ValidationError):
            k2_plan(-1.0, 2, 3, 1.0)


class TestVos:
    def test_no_change_is_zero(self):
        cov = np.diag([4.0, 1.0])
        assert vos(cov, cov) == 0.0

    def test_single_query_example(self):
        assert abs(vos(np.diag([4.0, 1.0]), np.diag([0.8, 1.0])) - 1.6) < 1e-12
        _, gain = greedy_direction(np.diag([4.0, 1.0]), 1.0)
        assert abs(gain - 1.6) < 1e-12

    def test_telescopes_along_random_paths(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((3, 3))
        prior = a @ a.T + np.eye(3)
        belief = GaussianBelief(np.zeros(3), prior, 0.8)
        total = 0.0
        for _ in range(5):
            y = rng.standard_normal(3)
            y /= np.linalg.norm(y)
            cov = belief.cov
            gain = 0.5 * float(y @ cov @ cov @ y) / (belief.noise_var + float(y @ cov @ y))
            new_belief = kalman_update(belief, Query(y), Response(float(rng.standard_normal())))
            # per-round gain equals the realized trace drop
            assert abs(gain - 0.5 * (np.trace(cov) - np.trace(new_belief.cov))) < 1e-10
            total += gain
            belief = new_belief
        assert abs(total - vos(prior, belief.cov)) < 1e-8

    def test_uncertainty_decomposition_identity(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((4, 4))
        prior = a @ a.T + np.eye(4)
        plan = waterfill(prior, 6, 1.3)
        post = plan.posterior_cov()
        assert abs(vos(prior, post) + hedging_gap(post) - 0.5 * np.trace(prior)) < 1e-10


class TestLowerBound:
    def test_isotropic_tight_at_full_rank(self):
        bound = solicitation_lower_bound(np.eye(10), 10, 1.0)
        assert abs(bound - 2.5) < 1e-12
        plan = waterfill(np.eye(10), 10, 1.0)
        assert abs(hedging_gap(plan.posterior_cov()) - bound) < 1e-8

    def test_zero_budget_is_half_trace(self):
        for d in (2, 5):
            assert abs(solicitation_lower_bound(np.eye(d), 0, 1.0) - d / 2.0) < 1e-12

    def test_loose_below_dimension(self):
        bound = solicitation_lower_bound(np.eye(10), 5, 1.0)
        assert abs(bound - 100.0 / 30.0) < 1e-12
        plan = waterfill(np.eye(10), 5, 1.0)
        gap = hedging_gap(plan.posterior_cov())
        assert abs(gap - 3.75) < 1e-10
        assert bound <= gap


class TestThresholds:
    def test_alpha_values(self):
        report = thresholds_and_ratios(np.diag([4.0, 1.0]), 0, 1.0)
        assert abs(report.alpha - 1.25) < 1e-12
        iso = thresholds_and_ratios(np.eye(3), 0, 1.0)
        assert abs(iso.alpha - 1.0) < 1e-12

    def test_m_bar_and_equalization(self):
        report = thresholds_and_ratios(np.diag([4.0, 1.0]), 2, 1.0)
        assert abs(report.m_bar - 0.75) < 1e-12
        assert abs(report.alpha - 1.0) < 1e-10  # m >= max(d, m_bar) => isotropic

    def test_breadth_requirement_scaling(self):
        report = thresholds_and_ratios(np.eye(2), 0, 1.0)
        # eps at the k^{-2/d} scale should demand roughly that k
        for k in (4, 16, 64):
            eps = 2.0 * (k ** (-1.0)) / 2.0  # d=2: d (det)^{1/d} k^{-2/d} / 2
            assert abs(report.breadth_needed(eps) - k) < 1e-6


class TestR2Ratio:
    def test_large_m_matches_paper_constants(self):
        r = r2_ratio(2, 100, 1.0, 1.0)
        assert abs(r.ratio - r.bound) < 1e-12
        assert abs(r.bound - 1.061) < 5e-4
        r5 = r2_ratio(5, 1000, 1.0, 1.0)
        assert abs(r5.bound - 1.030) < 5e-4

    def test_equals_one_below_dimension(self):
        for d, m in ((3, 2), (5, 4), (2, 1)):
            assert r2_ratio(d, m, 1.0, 1.0).ratio == 1.0

    def test_ratio_never_exceeds_bound(self):
        for d in (2, 3, 5):
            for m in range(0, 3 * d + 4):
                r = r2_ratio(d, m, 1.3, 0.7)
                assert r.ratio <= r.bound + 1e-12


class TestSelectiveFocusCrossover:
    @pytest.mark.parametrize(
        "d,m,prior_var,noise_var",
        [(2, 2, 1.0, 1.0), (2, 6, 1.0, 1.0), (3, 2, 1.0, 1.0), (3, 5, 0.5, 2.0), (5, 5, 1.0, 10.0), (4, 12, 2.0, 1.0)],
    )
    def test_numerical_search_reproduces_plan(self, d, m, prior_var, noise_var):
        profile = k2_plan(prior_var, d, m, noise_var)
        oracle = k2_profile_search(d, m, prior_var, noise_var)
        np.testing.assert_allclose(profile, oracle, atol=1e-4)
        assert two_point_distortion(profile) <= two_point_distortion(oracle) + 1e-8


def test_waterfill_beats_random_sequences():
    rng = np.random.default_rng(77)
    for d, m in ((2, 3), (3, 4)):
        a = rng.standard_normal((d, d))
        prior = a @ a.T + 0.5 * np.eye(d)
        plan = waterfill(prior, m, 1.0)
        traces = random_sequence_traces(prior, m, 1.0, 500, rng)
        assert plan.posterior_eigs.sum() <= traces.min() + 1e-9
