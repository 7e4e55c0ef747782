"""Scalar matching losses: quadrature and finite-difference oracles, CE
comparison, properness, and BUST/BLUST."""

import numpy as np
import pytest
from scipy.integrate import quad

from selmatch.errors import DegenerateDomain, NonInjectiveLink, OutOfRange, RootNotBracketed
from selmatch.links import LinkSpec, ScoreDomain, link_breakpoints, link_value
from selmatch.scalar import (
    BustConfig,
    WeightedScores,
    blust,
    bust,
    bust_simulate,
    ce_loss_sigmoid,
    matching_grad,
    matching_loss,
    proper_prediction,
)

from conftest import LINK_SPECS, STRICT_LINKS, away_from_breakpoints

DOMAIN = ScoreDomain(-5.0, 5.0)


def quad_loss(spec, s_hat, s):
    """Adaptive-quadrature oracle for the loss integral of h(z) - h(s)."""
    lo, hi = min(s, s_hat), max(s, s_hat)
    points = [b for b in link_breakpoints(spec) if lo < b < hi] or None
    val, _ = quad(lambda z: float(link_value(spec, z)) - float(link_value(spec, s)),
                  s, s_hat, epsabs=1e-13, epsrel=1e-13, limit=200, points=points)
    return val


class TestMatchingLoss:
    @pytest.mark.parametrize("name", sorted(LINK_SPECS))
    def test_zero_at_equal_scores(self, name, rng):
        spec = LINK_SPECS[name]
        for s in rng.uniform(-5, 5, size=10):
            assert matching_loss(spec, s, s) == 0.0

    def test_identity_is_half_square(self):
        assert matching_loss(LinkSpec("identity"), 3.0, 1.0) == 2.0

    def test_sigmoid_matches_quadrature_example(self):
        spec = LinkSpec("sigmoid")
        loss = matching_loss(spec, 1.0, 0.0)
        assert loss == pytest.approx(quad_loss(spec, 1.0, 0.0), abs=1e-8)
        assert loss == pytest.approx(0.12011450695827752, abs=1e-12)

    @pytest.mark.parametrize("name", sorted(LINK_SPECS))
    def test_quadrature_oracle(self, name, rng):
        spec = LINK_SPECS[name]
        zs = away_from_breakpoints(rng, spec, 200)
        for s_hat, s in zip(zs[:100], zs[100:]):
            assert matching_loss(spec, s_hat, s) == pytest.approx(
                quad_loss(spec, s_hat, s), abs=1e-8)

    @pytest.mark.parametrize("name", sorted(STRICT_LINKS))
    def test_positive_for_distinct_scores(self, name, rng):
        spec = STRICT_LINKS[name]
        # Separations sampled down to just above the 1e-6 threshold.
        for _ in range(200):
            s = rng.uniform(-5, 5)
            gap = 10.0 ** rng.uniform(-5.9, 0.9) * rng.choice([-1.0, 1.0])
            s_hat = s + gap
            assert matching_loss(spec, s_hat, s) > 0.0

    def test_small_gap_regime_agrees_with_quadrature(self, rng):
        # Both sides of the small-gap switch evaluate the same integral.
        spec = LinkSpec("sigmoid")
        for gap in (5e-5, 2e-4):
            s = 0.7
            assert matching_loss(spec, s + gap, s) == pytest.approx(
                quad_loss(spec, s + gap, s), rel=1e-10, abs=1e-16)

    def test_local_quadratic_scaling(self):
        # loss(s + delta, s) / delta^2 approaches h'(s)/2 at first order.
        from selmatch.links import link_slope

        for name in ("sigmoid", "exponential", "sinh"):
            spec = LINK_SPECS[name]
            s = 0.7
            half_slope = float(link_slope(spec, s)) / 2.0
            errs = [abs(matching_loss(spec, s + d, s) / d**2 - half_slope)
                    for d in (1e-2, 1e-3)]
            assert errs[1] <= 0.15 * errs[0] + 1e-12

    def test_clamp_saturation_warns(self):
        with pytest.warns(RuntimeWarning):
            matching_loss(LinkSpec("exponential"), 800.0, 0.0)


class TestMatchingGrad:
    def test_zero_at_equal(self):
        assert matching_grad(LinkSpec("sigmoid"), 1.3, 1.3) == 0.0

    def test_identity_analytic(self):
        assert matching_grad(LinkSpec("identity"), 3.0, 1.0) == 2.0

    @pytest.mark.parametrize("name", sorted(LINK_SPECS))
    def test_matches_loss_finite_difference(self, name, rng):
        spec = LINK_SPECS[name]
        zs = away_from_breakpoints(rng, spec, 40, margin=5e-3)
        eps = 1e-6
        for s_hat, s in zip(zs[:20], zs[20:]):
            fd = (matching_loss(spec, s_hat + eps, s)
                  - matching_loss(spec, s_hat - eps, s)) / (2 * eps)
            grad = matching_grad(spec, s_hat, s)
            assert fd == pytest.approx(grad, rel=1e-5, abs=1e-7)

    def test_sign_matches_direction(self, rng):
        spec = LinkSpec("sigmoid")
        for _ in range(50):
            s_hat, s = rng.uniform(-5, 5, size=2)
            if s_hat != s:
                assert np.sign(matching_grad(spec, s_hat, s)) == np.sign(s_hat - s)


class TestCeSigmoid:
    def test_grad_zero_at_equal(self):
        _, grad = ce_loss_sigmoid(1.0, 0.0, 1.3, 1.3)
        assert grad == 0.0

    def test_grad_equals_matching_grad(self, rng):
        # CE and matching gradients coincide for the Sigmoid link.
        for alpha, beta in [(1.0, 0.0), (2.0, 1.0)]:
            link = LinkSpec("sigmoid", alpha=alpha, beta=beta)
            for _ in range(100):
                s_hat, s = rng.uniform(-5, 5, size=2)
                _, g_ce = ce_loss_sigmoid(alpha, beta, s_hat, s)
                assert abs(g_ce - matching_grad(link, s_hat, s)) < 1e-12

    def test_loss_gradient_consistent(self, rng):
        eps = 1e-6
        for _ in range(20):
            s_hat, s = rng.uniform(-3, 3, size=2)
            lp, _ = ce_loss_sigmoid(2.0, 1.0, s_hat + eps, s)
            lm, _ = ce_loss_sigmoid(2.0, 1.0, s_hat - eps, s)
            _, grad = ce_loss_sigmoid(2.0, 1.0, s_hat, s)
            assert (lp - lm) / (2 * eps) == pytest.approx(grad, rel=1e-5, abs=1e-8)


class TestProperPrediction:
    def test_sigmoid_symmetric_population(self):
        obs = WeightedScores([(-1.0, 0.5), (1.0, 0.5)])
        assert proper_prediction(LinkSpec("sigmoid"), obs, DOMAIN) == pytest.approx(0.0, abs=1e-8)

    def test_identity_gives_weighted_mean(self, rng):
        for _ in range(10):
            scores = rng.uniform(-4, 4, size=5)
            weights = rng.uniform(0.1, 2.0, size=5)
            obs = WeightedScores(list(zip(scores, weights)))
            assert proper_prediction(LinkSpec("identity"), obs, DOMAIN) == pytest.approx(
                obs.mean(), abs=1e-8)

    def test_exponential_log_mean_exp(self):
        obs = WeightedScores([(0.0, 0.5), (2.0, 0.5)])
        got = proper_prediction(LinkSpec("exponential"), obs, DOMAIN)
        assert got == pytest.approx(1.4337808304830273, abs=1e-10)

    def test_expected_gradient_vanishes(self, rng):
        for name in ("sigmoid", "identity", "exponential"):
            spec = LINK_SPECS[name]
            scores = rng.uniform(-2, 2, size=4)
            weights = rng.uniform(0.5, 1.5, size=4)
            obs = WeightedScores(list(zip(scores, weights)))
            s_hat = proper_prediction(spec, obs, DOMAIN)
            expected_grad = float(np.dot(obs.weights,
                                         [matching_grad(spec, s_hat, s) for s in obs.scores]))
            assert abs(expected_grad) < 1e-8

    def test_grid_minimization_oracle(self, rng):
        # The proper prediction lands within one grid step of the empirical
        # expected-loss minimizer.
        grid = np.linspace(-5, 5, 10_000)
        step = grid[1] - grid[0]
        populations = [
            WeightedScores([(-1.0, 0.5), (1.0, 0.5)]),
            WeightedScores([(0.0, 0.5), (2.0, 0.5)]),
            WeightedScores([(-2.0, 0.3), (0.0, 0.4), (1.0, 0.3)]),
        ]
        for name in ("sigmoid", "identity", "exponential"):
            spec = LINK_SPECS[name]
            for obs in populations:
                s_hat = proper_prediction(spec, obs, DOMAIN)
                expected = np.zeros_like(grid)
                for s, w in zip(obs.scores, obs.weights):
                    expected += w * np.array([matching_loss(spec, g, float(s)) for g in grid])
                assert abs(grid[np.argmin(expected)] - s_hat) <= step + 1e-12

    def test_flat_link_raises(self):
        obs = WeightedScores([(2.0, 1.0), (3.0, 1.0)])
        with pytest.raises(NonInjectiveLink):
            proper_prediction(LinkSpec("smelu_grad", extra={"c": 1.0}), obs, DOMAIN)

    def test_out_of_image_raises(self):
        obs = WeightedScores([(4.0, 1.0)])
        with pytest.raises(OutOfRange):
            proper_prediction(LinkSpec("sigmoid"), obs, ScoreDomain(-5.0, 3.0))


class TestBust:
    def test_zero_bias(self):
        cfg = BustConfig(DOMAIN, w_u=0.0, d=0.0, tau=1e-3)
        assert bust(LinkSpec("sigmoid"), cfg) == 0.0
        assert bust_simulate(LinkSpec("sigmoid"), cfg) == 0.0

    def test_sigmoid_closed_form(self):
        cfg = BustConfig(DOMAIN, w_u=0.0, d=1.0, tau=1e-3)
        assert bust(LinkSpec("sigmoid"), cfg) == pytest.approx(
            0.2341934219511391, abs=1e-14)

    def test_identity_linear(self):
        cfg = BustConfig(ScoreDomain(0.0, 10.0), w_u=4.0, d=2.0, tau=0.5)
        assert bust(LinkSpec("identity"), cfg) == pytest.approx(0.2, abs=1e-14)
        assert bust_simulate(LinkSpec("identity"), cfg) == pytest.approx(0.2, abs=1e-9)

    @pytest.mark.parametrize("name", ["sigmoid", "identity", "exponential"])
    def test_simulation_oracle_agrees(self, name):
        spec = LINK_SPECS[name]
        for w_u, d in [(0.0, 1.0), (-2.0, 0.5), (1.5, -1.0)]:
            cfg = BustConfig(DOMAIN, w_u=w_u, d=d, tau=1e-3)
            assert bust_simulate(spec, cfg) == pytest.approx(bust(spec, cfg), abs=1e-3)

    def test_degenerate_domain(self):
        # step link is constant 1 on [1, 5].
        cfg = BustConfig(ScoreDomain(1.0, 5.0), w_u=3.0, d=0.5, tau=0.1)
        with pytest.raises(DegenerateDomain):
            bust(LinkSpec("step"), cfg)
        with pytest.raises(DegenerateDomain):
            blust(LinkSpec("step"), ScoreDomain(1.0, 5.0), 3.0)

    def test_large_bias_still_solves(self):
        # The displacement equation keeps a root even for extreme biases;
        # RootNotBracketed remains a defensive guard only.
        cfg = BustConfig(ScoreDomain(0.0, 10.0), w_u=5.0, d=1000.0, tau=0.5)
        assert bust_simulate(LinkSpec("identity"), cfg) == pytest.approx(
            bust(LinkSpec("identity"), cfg), rel=1e-9)

    def test_interval_must_fit_domain(self):
        with pytest.raises(ValueError):
            BustConfig(DOMAIN, w_u=4.9999, d=0.0, tau=1e-2)
        with pytest.raises(ValueError):
            BustConfig(DOMAIN, w_u=0.0, d=0.0, tau=5.0)


class TestBlust:
    def test_sigmoid_value(self):
        assert blust(LinkSpec("sigmoid"), DOMAIN, 0.0) == pytest.approx(
            0.2533918274531521, abs=1e-14)

    def test_identity_constant(self):
        dom = ScoreDomain(0.0, 10.0)
        for w in (1.0, 5.0, 9.0):
            assert blust(LinkSpec("identity"), dom, w) == pytest.approx(0.1, abs=1e-14)

    @pytest.mark.parametrize("name", sorted(STRICT_LINKS))
    def test_limit_of_bust(self, name):
        spec = STRICT_LINKS[name]
        d = 1e-5
        for w_u in (-1.0, 0.0, 1.5):
            cfg = BustConfig(DOMAIN, w_u=w_u, d=d, tau=1e-4)
            assert bust(spec, cfg) / d == pytest.approx(
                blust(spec, DOMAIN, w_u), rel=1e-3)
