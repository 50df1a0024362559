import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesgmq import (
    DegenerateDataError,
    DomainError,
    ExistenceError,
    MomentParams,
    PosteriorParams,
    RiskSpec,
    UndefinedRiskError,
    conventional_estimates,
    frontier_mean_q,
    frontier_mean_variance,
    gmq_exists,
    gmq_portfolio,
    gmv_summary,
    make_rng,
    mean_variance_weights,
    portfolio_risk,
    posterior_params,
    predictive_moments,
    sufficient_statistics,
)
from bayesgmq.optimizer import default_return_grid, existence_margin

from conftest import random_window
from oracles import (
    best_random_risk,
    constrained_risk_minimizer,
    gmv_by_nullspace,
    mean_variance_by_kkt,
    one_dimensional_gmq,
)


def instance(seed, n=60, k=5):
    return posterior_params(random_window(n, k, seed=seed))


def with_mean(params, xbar):
    return PosteriorParams(params.d, params.r, np.asarray(xbar, float), params.S, params.n)


class TestConventionalEstimates:
    def test_constant_window(self):
        with pytest.raises(DegenerateDataError):
            conventional_estimates(np.tile([0.01, 0.02, 0.03], (10, 1)))

    def test_scatter_relation(self):
        x = random_window(40, 3, seed=1)
        est = conventional_estimates(x)
        _, scatter = sufficient_statistics(x)
        np.testing.assert_allclose(est.sigma * 39, scatter, rtol=1e-15)

    def test_two_pass_oracle(self):
        x = random_window(40, 3, seed=2)
        mean = [sum(col) / 40 for col in x.T]
        cov = [[sum((x[i, a] - mean[a]) * (x[i, b] - mean[b]) for i in range(40)) / 39 for b in range(3)] for a in range(3)]
        est = conventional_estimates(x)
        np.testing.assert_allclose(est.mu, mean, rtol=1e-13)
        np.testing.assert_allclose(est.sigma, cov, rtol=1e-12)

    def test_divisor_option(self):
        x = random_window(40, 3, seed=2)
        np.testing.assert_allclose(conventional_estimates(x, ddof=0).sigma * 40, conventional_estimates(x).sigma * 39)

    def test_needs_n_above_k_plus_one(self):
        with pytest.raises(DomainError):
            conventional_estimates(np.ones((4, 3)))


class TestGmv:
    def test_identity_symmetric(self):
        g = gmv_summary(MomentParams(np.zeros(4), np.eye(4)))
        np.testing.assert_allclose(g.weights, 0.25)
        assert g.slope == 0.0
        assert g.variance == pytest.approx(0.25)

    def test_diagonal(self):
        g = gmv_summary(MomentParams(np.zeros(2), np.diag([1.0, 4.0])))
        np.testing.assert_allclose(g.weights, [0.8, 0.2], rtol=1e-15)

    def test_nullspace_oracle(self):
        for seed in range(5):
            params = instance(seed, k=6)
            g = gmv_summary(params)
            np.testing.assert_allclose(g.weights, gmv_by_nullspace(params.S), atol=1e-8)
            assert g.weights.sum() == pytest.approx(1.0, abs=1e-14)
            assert g.slope >= 0

    def test_bayesian_variance_factor(self, params5):
        g = gmv_summary(params5)
        ones = np.ones(5)
        a = ones @ np.linalg.solve(params5.S, ones)
        d, r = params5.d, params5.r
        assert g.variance == pytest.approx(d * r / (d - 2) / a, rel=1e-12)
        assert g.variance == pytest.approx(predictive_moments(params5, g.weights).variance, rel=1e-12)

    def test_needs_three_dof(self):
        p = PosteriorParams(2.0, 1.0, np.zeros(2), np.eye(2), 4)
        with pytest.raises(UndefinedRiskError):
            gmv_summary(p)


class TestMeanVariance:
    def test_target_at_gmv(self, params5):
        g = gmv_summary(params5)
        np.testing.assert_array_equal(mean_variance_weights(params5, g.ret), g.weights)

    def test_constraints_and_kkt(self):
        for seed in range(10):
            params = instance(seed)
            g = gmv_summary(params)
            target = g.ret + 0.01 * (seed + 1)
            w = mean_variance_weights(params, target)
            assert w.sum() == pytest.approx(1.0, abs=1e-10)
            assert w @ params.xbar == pytest.approx(target, abs=1e-10)
            np.testing.assert_allclose(w, mean_variance_by_kkt(params.S, params.xbar, target), atol=1e-8)

    def test_equal_means_infeasible(self):
        moments = MomentParams(np.full(3, 0.01), np.diag([1.0, 2.0, 3.0]))
        with pytest.raises(DomainError):
            mean_variance_weights(moments, 0.02)


class TestGmq:
    def test_equal_means_reduce_to_gmv(self, params5):
        params = with_mean(params5, np.full(5, 0.002))
        g = gmv_summary(params)
        port = gmq_portfolio(params, RiskSpec())
        np.testing.assert_allclose(port.weights, g.weights, rtol=1e-14)
        assert port.ret == pytest.approx(g.ret, rel=1e-14)
        assert port.variance == pytest.approx(g.variance, rel=1e-14)

    def test_existence_boundary(self, params5):
        spec = RiskSpec()
        q2, threshold = existence_margin(params5, spec)
        # the threshold scales with the square of the mean vector
        centred = params5.xbar - gmv_summary(params5).ret
        for factor, exists in ((1 + 1e-9, False), (1 - 1e-9, True)):
            shifted = with_mean(params5, centred * math.sqrt(factor * q2 / threshold))
            assert gmq_exists(shifted, spec) is exists
        shifted = with_mean(params5, centred * math.sqrt((1 + 1e-9) * q2 / threshold))
        with pytest.raises(ExistenceError) as info:
            gmq_portfolio(shifted, spec)
        assert info.value.threshold > info.value.q_squared

    @pytest.mark.parametrize("seed", range(8))
    def test_one_dimensional_oracle(self, seed):
        params = instance(100 + seed)
        for spec in (RiskSpec("VaR", 0.95), RiskSpec("CVaR", 0.99)):
            port = gmq_portfolio(params, spec)
            v, ret, risk = one_dimensional_gmq(params, spec)
            assert port.variance == pytest.approx(v, rel=1e-8)
            assert abs(port.ret - ret) < 1e-8
            assert abs(port.risk - risk) < 1e-8
            assert abs(portfolio_risk(params, port.weights, spec) - port.risk) < 1e-12

    def test_random_search(self):
        params = instance(7)
        spec = RiskSpec()
        port = gmq_portfolio(params, spec)
        assert port.risk <= best_random_risk(params, spec, port.weights, make_rng(8)) + 1e-15

    def test_population_mode(self):
        rng = make_rng(9)
        from bayesgmq import generate_scenario

        mu, sigma = generate_scenario(6, rng)
        moments = MomentParams(mu, sigma)
        spec = RiskSpec(estimator="population")
        port = gmq_portfolio(moments, spec)
        assert port.risk == pytest.approx(portfolio_risk(moments, port.weights, spec), abs=1e-14)
        assert port.risk <= best_random_risk(moments, spec, port.weights, make_rng(10)) + 1e-15

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_dominance_over_gmv(self, seed):
        params = instance(seed, n=40, k=4)
        spec = RiskSpec()
        if not gmq_exists(params, spec):
            return
        g = gmv_summary(params)
        port = gmq_portfolio(params, spec)
        assert g.slope > 0
        assert port.ret > g.ret
        assert port.variance > g.variance
        assert portfolio_risk(params, g.weights, spec) > port.risk
        # the GMQ portfolio sits on the upper mean-variance frontier
        upper = frontier_mean_variance(params, [port.variance])
        assert upper.y[0] == pytest.approx(port.ret, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.51, 0.98), st.floats(0.0001, 0.02))
    def test_existence_monotone_in_alpha(self, seed, alpha, step):
        params = instance(seed, n=15, k=10)
        for mode in (params, conventional_estimates(random_window(15, 10, seed=seed))):
            est = "bayesian" if mode is params else "conventional"
            if gmq_exists(mode, RiskSpec("VaR", alpha, est)):
                assert gmq_exists(mode, RiskSpec("VaR", min(alpha + step, 0.9999), est))

    @pytest.mark.parametrize("seed", range(3))
    def test_constrained_solution_ignores_alpha(self, seed):
        params = instance(200 + seed)
        port = gmq_portfolio(params, RiskSpec("VaR", 0.95))
        target = port.ret + 0.002
        analytic = mean_variance_weights(params, target)
        for alpha in (0.95, 0.99):
            found = constrained_risk_minimizer(params, RiskSpec("VaR", alpha), target)
            np.testing.assert_allclose(found, analytic, atol=1e-6)


class TestFrontiers:
    def test_value_at_gmv_return(self, params5):
        spec = RiskSpec()
        g = gmv_summary(params5)
        curve = frontier_mean_q(params5, spec, [g.ret])
        q = gmq_portfolio(params5, spec).q_alpha
        d = params5.d
        assert curve.y[0] == pytest.approx(q * math.sqrt((d - 2) / d * g.variance) - g.ret, rel=1e-13)

    def test_grid_minimum_is_gmq(self, params5):
        spec = RiskSpec()
        port = gmq_portfolio(params5, spec)
        g = gmv_summary(params5)
        grid = np.linspace(g.ret, g.ret + 3 * (port.ret - g.ret), 20001)
        curve = frontier_mean_q(params5, spec, grid)
        i = int(np.argmin(curve.y))
        h = grid[1] - grid[0]
        assert abs(grid[i] - port.ret) <= h
        assert curve.y[i] >= port.risk - 1e-14
        assert curve.y[i] - port.risk < 1e-8

    def test_gmq_on_frontier(self, params5):
        spec = RiskSpec("CVaR", 0.99)
        port = gmq_portfolio(params5, spec)
        curve = frontier_mean_q(params5, spec, [port.ret])
        assert abs(curve.y[0] - portfolio_risk(params5, port.weights, spec)) < 1e-10

    def test_gmv_point(self, params5):
        spec = RiskSpec()
        g = gmv_summary(params5)
        curve = frontier_mean_q(params5, spec, default_return_grid(g))
        assert curve.gmv_point[0] == g.ret
        assert curve.gmv_point[1] == pytest.approx(portfolio_risk(params5, g.weights, spec))
        assert curve.gmv_point[1] > gmq_portfolio(params5, spec).risk

    def test_population_frontier_matches_portfolios(self):
        from bayesgmq import generate_scenario

        mu, sigma = generate_scenario(5, make_rng(3))
        moments = MomentParams(mu, sigma)
        spec = RiskSpec(estimator="population")
        g = gmv_summary(moments)
        for target in np.linspace(g.ret, g.ret + 0.01, 5):
            w = mean_variance_weights(moments, target)
            curve = frontier_mean_q(moments, spec, [target])
            assert curve.y[0] == pytest.approx(portfolio_risk(moments, w, spec), abs=1e-13)

    def test_flat_means_rejected(self, params5):
        with pytest.raises(DomainError):
            frontier_mean_q(with_mean(params5, np.zeros(5)), RiskSpec(), [0.0, 0.1])

    def test_grid_must_increase(self, params5):
        with pytest.raises(DomainError):
            frontier_mean_q(params5, RiskSpec(), [0.1, 0.0])

    def test_mean_variance_vertex_and_identity(self, params5):
        g = gmv_summary(params5)
        grid = g.variance * np.array([1.0, 1.5, 3.0, 10.0])
        curve = frontier_mean_variance(params5, grid)
        assert curve.y[0] == g.ret
        d, r = params5.d, params5.r
        resid = (curve.y - g.ret) ** 2 - (d - 2) / (d * r) * g.slope * (grid - g.variance)
        assert np.max(np.abs(resid)) < 1e-12

    def test_mean_variance_matches_predictive_variance(self, params5):
        g = gmv_summary(params5)
        grid = g.variance * np.array([1.2, 2.0, 5.0])
        curve = frontier_mean_variance(params5, grid)
        for v, ret in zip(grid, curve.y):
            w = mean_variance_weights(params5, ret)
            assert predictive_moments(params5, w).variance == pytest.approx(v, rel=1e-8)

    def test_variance_below_gmv_rejected(self, params5):
        g = gmv_summary(params5)
        with pytest.raises(DomainError):
            frontier_mean_variance(params5, [0.5 * g.variance])
