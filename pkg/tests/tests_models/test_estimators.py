"""
Unit tests for the `src.models.estimators` module.

This test suite validates the selection rules, the selected posterior estimate and
the bounds derived from its Hellinger distance to the truth.

Key tests include:

- `TestSelectionRule`: Checks the rule parameters.

- `TestSelect`: Validates retention and weights for each rule on hand-built chains.

- `TestMeanAndClassify`: Checks the plug-in mean and the strict 0.5 classifier.

- `TestConvexityBoundCheck`: Verifies the bound at the truth, at eps = sqrt(2) and on
a Monte Carlo normal mixture.

- `TestRegressionClassificationChecks`: Checks the weighted L2 and excess-risk
report, including the Bayes error of a pure-noise model and the full chain of bounds
on a probit posterior fitted by the sampler.

The tests use Python's `unittest` framework with fixed random seeds.
"""

# Standard library imports
import unittest

# Third-party imports
import numpy as np
from scipy.special import logit

# Local imports
from src.assets.custom_errors import ConfigValidationError, SelectionRuleError, UnsupportedFamilyError
from src.models.glm_core import FamilyKind, GlmFamily, normal, sample_response
from src.models.hellinger import IndicatorDesign, TrueModel, UniformCube, posterior_hellinger
from src.models.estimators import (
    MixtureDensity, SelectionRule, classify, convexity_bound_check, mean_estimate,
    mixture_hellinger, regression_classification_checks, select
)
from src.models.posterior import Chain, Dataset, McmcConfig, PosteriorDraw, mcmc_run
from src.models.prior import ModelIndicator, PriorSpec

LOGISTIC = GlmFamily(FamilyKind.LOGISTIC)


def _draw(included: tuple[int, ...], beta: list[float], K: int = 3, phi: float | None = None) -> PosteriorDraw:
    return PosteriorDraw(ModelIndicator(included, K), np.array(beta, dtype=float), phi, 0.0)


def _single(value: float, K: int = 2) -> MixtureDensity:
    # One logistic component with mean `value` at x = e_0
    return MixtureDensity.single(_draw((0,), [logit(value)], K), LOGISTIC, K)


class TestSelectionRule(unittest.TestCase):
    """
    Test suite for SelectionRule.
    """
    def test_invalid_parameters(self) -> None:
        """
        Test that m < 1 and thresholds outside (0, 1) are rejected.
        """
        with self.assertRaises(ConfigValidationError):
            SelectionRule.best_m(0)
        with self.assertRaises(ConfigValidationError):
            SelectionRule.inclusion_threshold(1.0)


class TestSelect(unittest.TestCase):
    """
    Test suite for select.
    """
    def setUp(self) -> None:
        """
        Set up a chain with inclusion frequencies (0.6, 0.2, 0.4).
        """
        draws = [_draw((0,), [1.0]), _draw((0,), [1.1]), _draw((0, 1), [0.9, 0.2]),
                 _draw((2,), [0.5]), _draw((2,), [0.4])]
        self.chain = Chain(draws, family=LOGISTIC, K=3)

    def test_all(self) -> None:
        """
        Test that ALL keeps every draw with uniform weights.
        """
        mix = select(self.chain, SelectionRule.all())
        self.assertEqual(mix.selection_prob, 1.0)
        np.testing.assert_allclose(mix.weights, np.full(5, 0.2))

    def test_best_m(self) -> None:
        """
        Test that BEST_M keeps the most visited models, ties broken by index order.
        """
        mix = select(self.chain, SelectionRule.best_m(2))
        self.assertEqual({d.gamma.included for d in mix.components}, {(0,), (2,)})
        self.assertAlmostEqual(mix.selection_prob, 0.8)

    def test_best_m_single_model(self) -> None:
        """
        Test that BEST_M(1) on a chain visiting one model equals ALL.
        """
        chain = Chain([_draw((1,), [0.3]), _draw((1,), [0.4])], family=LOGISTIC, K=3)
        self.assertEqual(select(chain, SelectionRule.best_m(1)).selection_prob, 1.0)
        self.assertEqual(len(select(chain, SelectionRule.best_m(1)).components), 2)

    def test_inclusion_threshold(self) -> None:
        """
        Test that the threshold keeps draws touching a covariate above it.
        """
        mix = select(self.chain, SelectionRule.inclusion_threshold(0.5))
        self.assertEqual(len(mix.components), 3)
        self.assertAlmostEqual(mix.selection_prob, 0.6)
        mix = select(self.chain, SelectionRule.inclusion_threshold(0.3))
        self.assertEqual(len(mix.components), 5)

    def test_threshold_too_strict(self) -> None:
        """
        Test that an empty retention reports the largest usable threshold.
        """
        with self.assertRaises(SelectionRuleError) as ctx:
            select(self.chain, SelectionRule.inclusion_threshold(0.7))
        self.assertAlmostEqual(ctx.exception.max_threshold, 0.6)


class TestMeanAndClassify(unittest.TestCase):
    """
    Test suite for mean_estimate and classify.
    """
    def test_mixture_mean(self) -> None:
        """
        Test that two equal-weight components with means 0.2 and 0.6 give 0.4.
        """
        components = (_draw((0,), [logit(0.2)], 2), _draw((0,), [logit(0.6)], 2))
        mix = MixtureDensity(components, np.array([0.5, 0.5]), 1.0, LOGISTIC, 2)
        self.assertAlmostEqual(mean_estimate(mix, [1.0, 0.0]), 0.4, places=12)
        np.testing.assert_allclose(mean_estimate(mix, np.array([[1.0, 0.0], [0.0, 1.0]])), [0.4, 0.5])

    def test_single_component(self) -> None:
        """
        Test that a single component gives its own mean.
        """
        self.assertAlmostEqual(mean_estimate(_single(0.3), [1.0, 0.0]), 0.3, places=12)

    def test_classify(self) -> None:
        """
        Test the strict 0.5 threshold of the classifier.
        """
        x = [1.0, 0.0]
        self.assertEqual(classify(_single(0.6), x), 1)
        self.assertEqual(classify(_single(0.4), x), 0)
        self.assertEqual(classify(_single(0.5), x), 0)

    def test_classify_non_binary(self) -> None:
        """
        Test that a non-binary family cannot classify.
        """
        mix = MixtureDensity.single(_draw((0,), [0.1], 2), normal(1.0), 2)
        with self.assertRaises(UnsupportedFamilyError):
            classify(mix, [1.0, 0.0])


class TestConvexityBoundCheck(unittest.TestCase):
    """
    Test suite for convexity_bound_check.
    """
    def setUp(self) -> None:
        """
        Set up a logistic truth on the indicator design.
        """
        self.truth = TrueModel(LOGISTIC, [1.0, 0.0, -0.5], IndicatorDesign(3))

    def test_at_truth(self) -> None:
        """
        Test that a single component at the truth has lhs = 0.
        """
        mix = MixtureDensity.single(_draw((0, 2), [1.0, -0.5]), LOGISTIC, 3)
        check = convexity_bound_check(mix, self.truth, [0.0], 0.1)
        self.assertAlmostEqual(check.lhs, 0.0, places=12)
        self.assertTrue(check.passed)

    def test_maximal_radius(self) -> None:
        """
        Test that eps = sqrt(2) gives rhs = 2 and always passes.
        """
        chain = Chain([_draw((1,), [3.0]), _draw((0,), [-2.0])], family=LOGISTIC, K=3)
        mix = select(chain, SelectionRule.all())
        distances = posterior_hellinger(chain, self.truth)
        check = convexity_bound_check(mix, self.truth, distances, np.sqrt(2.0))
        self.assertAlmostEqual(check.rhs, 2.0)
        self.assertTrue(check.passed)

    def test_normal_mixture(self) -> None:
        """
        Test the bound on a Monte Carlo normal mixture with retained tail draws.
        """
        truth = TrueModel(normal(1.0), [0.8, 0.0], UniformCube(2))
        rng = np.random.default_rng(31)
        draws = [_draw((0,), [0.8 + 0.3 * z], 2) for z in rng.standard_normal(20)]
        chain = Chain(draws, family=truth.family, K=2)
        mix = select(chain, SelectionRule.all())
        distances = posterior_hellinger(chain, truth, 2000, np.random.default_rng(1))
        check = convexity_bound_check(mix, truth, distances, 0.05, 5000, np.random.default_rng(2))
        self.assertTrue(check.passed)
        self.assertGreater(check.lhs_se, 0.0)

    def test_mixture_distance_is_exact_for_binary(self) -> None:
        """
        Test that the binary mixture distance on the indicator design has no Monte Carlo error.
        """
        mix = MixtureDensity.single(_draw((1,), [0.7]), LOGISTIC, 3)
        self.assertEqual(mixture_hellinger(mix, self.truth).se, 0.0)


class TestRegressionClassificationChecks(unittest.TestCase):
    """
    Test suite for regression_classification_checks.
    """
    def test_mixture_equals_truth(self) -> None:
        """
        Test that the truth itself has zero excess risk and zero weighted L2.
        """
        truth = TrueModel(LOGISTIC, [1.5, 0.0], UniformCube(2))
        mix = MixtureDensity.single(_draw((0,), [1.5], 2), LOGISTIC, 2)
        report = regression_classification_checks(mix, truth, 2000, np.random.default_rng(3))
        self.assertAlmostEqual(report.excess_risk, 0.0, places=12)
        self.assertAlmostEqual(report.weighted_l2, 0.0, places=12)
        self.assertTrue(report.l2_passed)
        self.assertTrue(report.excess_passed)

    def test_pure_noise_bayes_error(self) -> None:
        """
        Test that h* = 0 gives Bayes error 0.5.
        """
        truth = TrueModel(LOGISTIC, [0.0, 0.0], UniformCube(2))
        mix = MixtureDensity.single(_draw((1,), [0.4], 2), LOGISTIC, 2)
        report = regression_classification_checks(mix, truth, 500, np.random.default_rng(4))
        self.assertAlmostEqual(report.bayes_error, 0.5, places=12)
        self.assertTrue(report.excess_passed)

    def test_normal_family(self) -> None:
        """
        Test that a normal mixture reports no classification fields and passes the L2 bound.
        """
        truth = TrueModel(normal(1.0), [0.6, -0.4], UniformCube(2))
        mix = MixtureDensity.single(_draw((0,), [0.2], 2), truth.family, 2)
        report = regression_classification_checks(mix, truth, 4000, np.random.default_rng(5))
        self.assertIsNone(report.excess_risk)
        self.assertTrue(report.l2_passed)
        self.assertGreater(report.squared_distance, 0.0)

    def test_fitted_probit_posterior(self) -> None:
        """
        Test the convexity, weighted L2 and excess-risk bounds on a sampled probit posterior.
        """
        rng = np.random.default_rng(21)
        truth = TrueModel(GlmFamily(FamilyKind.PROBIT), [1.0, -0.6, 0.0, 0.0, 0.0], UniformCube(5))
        X = truth.x_law.sample(300, rng)
        data = Dataset(X, sample_response(truth.family, X @ truth.beta_star, rng), truth.family)
        chain = mcmc_run(data, PriorSpec(1, 3), McmcConfig(3000, burn_in=500, thin=5, seed=22))
        self.assertEqual(len(chain.draws), 500)
        distances = posterior_hellinger(chain, truth, 1000, np.random.default_rng(23))
        epsilon = float(np.median([d.value for d in distances]))
        mix = select(chain, SelectionRule.all())
        convexity = convexity_bound_check(mix, truth, distances, epsilon, 1000, np.random.default_rng(24))
        self.assertTrue(convexity.passed)
        report = regression_classification_checks(mix, truth, 2000, np.random.default_rng(25))
        self.assertTrue(report.l2_passed)
        self.assertTrue(report.excess_passed)
        self.assertGreaterEqual(report.bayes_error, 0.0)
        self.assertLessEqual(report.bayes_error, 0.5)


if __name__ == '__main__':
    unittest.main()
