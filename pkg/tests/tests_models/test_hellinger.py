"""
Unit tests for the `src.models.hellinger` module.

This test suite validates the covariate laws, the true-model container and the
Hellinger distances between fitted candidates and the data-generating model.

Key tests include:

- `TestXLaws`: Checks the indicator, uniform and Gaussian covariate laws.

- `TestTrueModel`: Verifies the dimension and dispersion checks.

- `TestHellingerDistance`: Compares exact and Monte Carlo distances with closed
forms, and checks the family guard.

- `TestPosteriorHellinger`: Validates per-draw distances over a chain.

- `TestTailProbability`: Checks the tail fraction and its argument checks.

The tests use Python's `unittest` framework with fixed random seeds.
"""

# Standard library imports
import unittest

# Third-party imports
import numpy as np

# Local imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, FactorizationError,
                                      FamilyMismatchError)
from src.models.glm_core import FamilyKind, GlmFamily, normal
from src.models.hellinger import (
    GaussianGraph, HellingerMethod, IndicatorDesign, TrueModel, UniformCube, draw_x_sample,
    hellinger_distance, posterior_hellinger, tail_probability
)
from src.models.posterior import Chain, PosteriorDraw
from src.models.prior import ModelIndicator

LOGISTIC = GlmFamily(FamilyKind.LOGISTIC)


class TestXLaws(unittest.TestCase):
    """
    Test suite for the covariate laws.
    """
    def setUp(self) -> None:
        """
        Set up a seeded random stream.
        """
        self.rng = np.random.default_rng(123)

    def test_indicator_design(self) -> None:
        """
        Test that every indicator row has a single unit entry.
        """
        X = IndicatorDesign(5).sample(200, self.rng)
        np.testing.assert_array_equal(X.sum(axis=1), np.ones(200))
        self.assertEqual(X.sum(), 200)

    def test_uniform_cube(self) -> None:
        """
        Test the range of the uniform law.
        """
        X = UniformCube(3).sample(1000, self.rng)
        self.assertLessEqual(np.max(np.abs(X)), 1.0)

    def test_gaussian_graph(self) -> None:
        """
        Test that the sample covariance approaches the inverse precision.
        """
        precision = np.array([[2.0, -1.0], [-1.0, 2.0]])
        X = GaussianGraph(precision).sample(200_000, self.rng)
        np.testing.assert_allclose(np.cov(X.T), np.linalg.inv(precision), atol=0.02)

    def test_gaussian_graph_invalid(self) -> None:
        """
        Test that non-symmetric or indefinite precisions are rejected.
        """
        with self.assertRaises(FactorizationError):
            GaussianGraph(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with self.assertRaises(FactorizationError):
            GaussianGraph(np.array([[1.0, 0.1], [0.0, 1.0]]))
        with self.assertRaises(DimensionError):
            GaussianGraph(np.ones((2, 3)))


class TestTrueModel(unittest.TestCase):
    """
    Test suite for TrueModel.
    """
    def test_dimension_mismatch(self) -> None:
        """
        Test that beta* must match the covariate law.
        """
        with self.assertRaises(DimensionError):
            TrueModel(LOGISTIC, [1.0, 2.0], UniformCube(3))

    def test_free_dispersion_required(self) -> None:
        """
        Test that the free-dispersion family needs a true dispersion.
        """
        with self.assertRaises(ConfigValidationError):
            TrueModel(GlmFamily(FamilyKind.NORMAL_UNKNOWN_VAR), [0.0], UniformCube(1))

    def test_l1_norm(self) -> None:
        """
        Test the l1 norm of beta*.
        """
        self.assertAlmostEqual(TrueModel(LOGISTIC, [1.0, -2.0, 0.5], UniformCube(3)).l1_norm, 3.5)


class TestHellingerDistance(unittest.TestCase):
    """
    Test suite for hellinger_distance.
    """
    def test_candidate_equals_truth(self) -> None:
        """
        Test that the truth itself is at distance zero.
        """
        truth = TrueModel(LOGISTIC, [0.5, -1.0, 0.0], UniformCube(3))
        estimate = hellinger_distance(truth, (ModelIndicator((0, 1), 3), [0.5, -1.0]), 500,
                                      np.random.default_rng(1))
        self.assertAlmostEqual(estimate.squared, 0.0, places=12)
        self.assertEqual(estimate.method, HellingerMethod.MONTE_CARLO)

    def test_indicator_closed_form(self) -> None:
        """
        Test d^2 = (2/K)(1 - exp(-beta^2/8)) on the indicator design.
        """
        K, beta = 4, 1.2
        truth = TrueModel(normal(1.0), np.zeros(K), IndicatorDesign(K))
        estimate = hellinger_distance(truth, (ModelIndicator((0,), K), [beta]))
        self.assertAlmostEqual(estimate.squared, (2.0 / K) * (1.0 - np.exp(-beta ** 2 / 8.0)), places=12)
        self.assertEqual(estimate.method, HellingerMethod.EXACT_DISCRETE)
        self.assertEqual(estimate.se, 0.0)
        self.assertEqual(estimate.n_x, K)

    def test_monte_carlo_against_indicator(self) -> None:
        """
        Test that Monte Carlo x draws on the indicator design agree with the exact value.
        """
        K = 3
        truth = TrueModel(normal(1.0), [0.0, 1.0, 0.0], IndicatorDesign(K))
        candidate = (ModelIndicator((0,), K), [2.0])
        exact = hellinger_distance(truth, candidate)
        estimate = hellinger_distance(truth, candidate, 20_000, np.random.default_rng(4))
        self.assertLess(abs(estimate.squared - exact.squared), 4.0 * estimate.se)

    def test_free_dispersion(self) -> None:
        """
        Test the unequal-variance normal distance at equal means.
        """
        family = GlmFamily(FamilyKind.NORMAL_UNKNOWN_VAR)
        truth = TrueModel(family, [0.0, 0.0], IndicatorDesign(2), dispersion_star=1.0)
        estimate = hellinger_distance(truth, (ModelIndicator.empty(2), [], 0.5))
        self.assertAlmostEqual(estimate.squared, 2.0 - 2.0 * np.sqrt(2.0 * np.sqrt(2.0) / 3.0), places=12)

    def test_family_mismatch(self) -> None:
        """
        Test that a candidate fitted with another family is refused.
        """
        truth = TrueModel(LOGISTIC, [0.0], IndicatorDesign(1))
        with self.assertRaises(FamilyMismatchError):
            hellinger_distance(truth, (ModelIndicator.empty(1), []), family=GlmFamily(FamilyKind.PROBIT))

    def test_x_draws_guard(self) -> None:
        """
        Test that fewer than two Monte Carlo x draws are refused.
        """
        truth = TrueModel(LOGISTIC, [0.0], UniformCube(1))
        with self.assertRaises(ConfigValidationError):
            draw_x_sample(truth, 1)


class TestPosteriorHellinger(unittest.TestCase):
    """
    Test suite for posterior_hellinger.
    """
    def test_identical_draws(self) -> None:
        """
        Test that a chain of identical draws gives a constant sequence.
        """
        truth = TrueModel(LOGISTIC, [1.0, 0.0], UniformCube(2))
        draw = PosteriorDraw(ModelIndicator((1,), 2), np.array([0.3]), None, 0.0)
        chain = Chain([draw] * 4, family=LOGISTIC, K=2)
        distances = posterior_hellinger(chain, truth, 1000, np.random.default_rng(2))
        self.assertEqual(len(distances), 4)
        self.assertEqual(len({d.value for d in distances}), 1)
        self.assertGreater(distances[0].value, 0.0)

    def test_empty_chain(self) -> None:
        """
        Test that an empty chain is refused.
        """
        truth = TrueModel(LOGISTIC, [1.0], UniformCube(1))
        with self.assertRaises(DimensionError):
            posterior_hellinger(Chain([], family=LOGISTIC, K=1), truth, 10)


class TestTailProbability(unittest.TestCase):
    """
    Test suite for tail_probability.
    """
    def test_bounds(self) -> None:
        """
        Test eps = sqrt(2) and eps = 0 against positive distances.
        """
        distances = [0.1, 0.5, 1.2]
        self.assertEqual(tail_probability(distances, np.sqrt(2.0)), 0.0)
        self.assertEqual(tail_probability(distances, 0.0), 1.0)
        self.assertAlmostEqual(tail_probability(distances, 0.5), 1.0 / 3.0)

    def test_invalid(self) -> None:
        """
        Test the empty sequence and negative epsilon errors.
        """
        with self.assertRaises(DimensionError):
            tail_probability([], 0.1)
        with self.assertRaises(ConfigValidationError):
            tail_probability([0.2], -0.1)


if __name__ == '__main__':
    unittest.main()
