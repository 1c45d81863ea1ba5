"""
Unit tests for the `src.experiments.graphical` module.

This test suite validates the true graph container, the node transforms, the
conditional Hellinger distance and the aggregation of per-node fits into a graph.

Key tests include:

- `TestGraphTruth`: Checks the implied node regressions, standardization and the
chain graph.

- `TestNodeTransform`: Verifies standardization, clipping and the constant-column error.

- `TestConditionalHellinger`: Compares the quadrature distance with closed forms and
checks the argument guards.

- `TestBuildGraph`: Validates the AND and OR edge sets, the threshold check and the
JSON export.

- `TestNeighborhoodSelect`: Runs short node regressions and a full graph fit.

The tests use Python's `unittest` framework with fixed random seeds.
"""

# Standard library imports
import unittest

# Third-party imports
import numpy as np

# Local imports
from src.assets.custom_errors import ConfigValidationError, DimensionError, StandardizationError
from src.experiments.graphical import (
    EdgeRule, GraphTruth, NodeTransform, build_graph, chain_graph, conditional_hellinger, fit_graph,
    inclusion_matrix, neighborhood_select, sample_graph_data
)
from src.models.estimators import MixtureDensity
from src.models.glm_core import FamilyKind, GlmFamily
from src.models.posterior import Chain, McmcConfig, PosteriorDraw
from src.models.prior import DispersionPrior, ModelIndicator, PriorSpec

FREE_NORMAL = GlmFamily(FamilyKind.NORMAL_UNKNOWN_VAR)


def _mixture(beta: float, phi: float) -> MixtureDensity:
    draw = PosteriorDraw(ModelIndicator((0,), 1), np.array([beta]), phi, 0.0)
    return MixtureDensity.single(draw, FREE_NORMAL, 1)


class TestGraphTruth(unittest.TestCase):
    """
    Test suite for GraphTruth and chain_graph.
    """
    def setUp(self) -> None:
        """
        Set up the two-node precision [[2, -1], [-1, 2]].
        """
        self.truth = GraphTruth(np.array([[2.0, -1.0], [-1.0, 2.0]]))

    def test_node_regression(self) -> None:
        """
        Test beta*_{0|1} = 0.5 and residual variance 0.5.
        """
        np.testing.assert_allclose(self.truth.coefficients(0), [0.5])
        self.assertAlmostEqual(self.truth.residual_variance(1), 0.5)
        np.testing.assert_allclose(self.truth.coefficient_matrix(), [[0.0, 0.5], [0.5, 0.0]])

    def test_standardization(self) -> None:
        """
        Test that the raw precision is not standardized and its rescaled version is.
        """
        self.assertFalse(self.truth.is_standardized)
        rescaled = GraphTruth.standardized(self.truth.precision)
        self.assertTrue(rescaled.is_standardized)
        np.testing.assert_array_equal(rescaled.adjacency(), self.truth.adjacency())

    def test_chain_graph(self) -> None:
        """
        Test the covariance rho^|i-k| and the tridiagonal adjacency of a chain.
        """
        truth = chain_graph(4, 0.5)
        self.assertTrue(truth.is_standardized)
        self.assertAlmostEqual(truth.covariance[0, 2], 0.25)
        expected = np.eye(4, k=1, dtype=bool) | np.eye(4, k=-1, dtype=bool)
        np.testing.assert_array_equal(truth.adjacency(), expected)
        with self.assertRaises(ConfigValidationError):
            chain_graph(4, 1.0)

    def test_sample_covariance(self) -> None:
        """
        Test that the sample precision approaches the true precision.
        """
        X = sample_graph_data(self.truth, 100_000, np.random.default_rng(5))
        np.testing.assert_allclose(np.linalg.inv(np.cov(X.T)), self.truth.precision, atol=0.05)

    def test_node_out_of_range(self) -> None:
        """
        Test that an unknown node is refused.
        """
        with self.assertRaises(DimensionError):
            self.truth.coefficients(2)


class TestNodeTransform(unittest.TestCase):
    """
    Test suite for NodeTransform.
    """
    def test_design_range(self) -> None:
        """
        Test that covariates stay in [-1, 1] and the response is standardized.
        """
        data = np.random.default_rng(2).normal(5.0, 2.0, (500, 3))
        transform = NodeTransform.fit(data, 1)
        self.assertLessEqual(np.max(np.abs(transform.covariates(data))), 1.0)
        response = transform.response(data)
        self.assertAlmostEqual(float(response.mean()), 0.0, places=10)
        self.assertAlmostEqual(float(response.std()), 1.0, places=10)
        np.testing.assert_array_equal(transform.others, [0, 2])

    def test_constant_column(self) -> None:
        """
        Test that a constant column raises StandardizationError.
        """
        data = np.column_stack([np.arange(10.0), np.ones(10)])
        with self.assertRaises(StandardizationError):
            NodeTransform.fit(data, 0)


class TestConditionalHellinger(unittest.TestCase):
    """
    Test suite for conditional_hellinger.
    """
    def setUp(self) -> None:
        """
        Set up the two-node graph and the identity transform of node 0.
        """
        self.truth = GraphTruth(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        self.transform = NodeTransform.identity(2, 0)

    def test_exact_conditional(self) -> None:
        """
        Test that the true conditional N(0.5 x_1, 0.5) is at distance zero.
        """
        estimate = conditional_hellinger(self.truth, 0, self.transform, _mixture(0.5, 2.0), n_mc=200)
        self.assertAlmostEqual(estimate.squared, 0.0, places=10)

    def test_variance_mismatch(self) -> None:
        """
        Test the closed form for a unit-variance fit with the true mean.
        """
        estimate = conditional_hellinger(self.truth, 0, self.transform, _mixture(0.5, 1.0), n_mc=200)
        expected = 2.0 - 2.0 * np.sqrt(2.0 * np.sqrt(2.0) / 3.0)
        self.assertAlmostEqual(estimate.squared, expected, places=8)

    def test_guards(self) -> None:
        """
        Test the node, mixture and dispersion checks.
        """
        with self.assertRaises(DimensionError):
            conditional_hellinger(self.truth, 1, self.transform, _mixture(0.5, 2.0))
        with self.assertRaises(ConfigValidationError):
            conditional_hellinger(self.truth, 0, self.transform)
        with self.assertRaises(DimensionError):
            conditional_hellinger(self.truth, 0, self.transform, _mixture(0.5, None))


class TestBuildGraph(unittest.TestCase):
    """
    Test suite for build_graph and GraphEstimate.
    """
    def setUp(self) -> None:
        """
        Set up an asymmetric inclusion matrix.
        """
        self.inclusion = np.array([[0.0, 0.9, 0.2], [0.8, 0.0, 0.7], [0.1, 0.3, 0.0]])

    def test_edge_rules(self) -> None:
        """
        Test that AND needs both directions and OR needs one.
        """
        graph = build_graph(self.inclusion, 0.5)
        self.assertEqual(graph.edges(EdgeRule.AND), [[0, 1]])
        self.assertEqual(graph.edges(EdgeRule.OR), [[0, 1], [1, 2]])
        np.testing.assert_array_equal(graph.adjacency, graph.adjacency_and)

    def test_threshold_check(self) -> None:
        """
        Test that thresholds outside (0, 1) are refused.
        """
        for threshold in (0.0, 1.0):
            with self.subTest(threshold=threshold):
                with self.assertRaises(ConfigValidationError):
                    build_graph(self.inclusion, threshold)

    def test_to_json(self) -> None:
        """
        Test the exported fields and the unscored nodes.
        """
        payload = build_graph(self.inclusion, 0.5, EdgeRule.OR, h_hat=[0.1, np.nan, 0.2]).to_json()
        self.assertEqual(payload["nodes"], 3)
        self.assertEqual(payload["rule"], "or")
        self.assertEqual(payload["edges"], [[0, 1], [1, 2]])
        self.assertEqual(payload["h_hat"], [0.1, None, 0.2])

    def test_chain_dimension(self) -> None:
        """
        Test that a chain of the wrong width is refused.
        """
        chain = Chain([], family=FREE_NORMAL, K=3)
        with self.assertRaises(DimensionError):
            inclusion_matrix([chain, chain])


class TestNeighborhoodSelect(unittest.TestCase):
    """
    Test suite for neighborhood_select and fit_graph.
    """
    def setUp(self) -> None:
        """
        Set up data from a three-node chain graph and a short sampler.
        """
        self.truth = chain_graph(3, 0.6)
        self.data = sample_graph_data(self.truth, 300, np.random.default_rng(9))
        self.spec = PriorSpec(1, 1, dispersion=DispersionPrior(1.0, 1.0))
        self.config = McmcConfig(iterations=600, burn_in=100, thin=5, seed=4)

    def test_missing_dispersion_prior(self) -> None:
        """
        Test that a prior without a dispersion prior is refused.
        """
        with self.assertRaises(ConfigValidationError):
            neighborhood_select(self.data, 0, PriorSpec(1, 1), self.config)

    def test_node_fit(self) -> None:
        """
        Test the chain width and a distance in range for node 0.
        """
        fit = neighborhood_select(self.data, 0, self.spec, self.config)
        self.assertEqual(fit.j, 0)
        self.assertEqual(fit.chain.K, 2)
        self.assertEqual(len(fit.chain.draws), 100)
        estimate = conditional_hellinger(self.truth, 0, fit, n_mc=200, rng=np.random.default_rng(1))
        self.assertGreaterEqual(estimate.value, 0.0)
        self.assertLessEqual(estimate.value, np.sqrt(2.0))

    def test_worker_count_invariance(self) -> None:
        """
        Test that one and two workers give the same inclusion matrix.
        """
        serial, fits = fit_graph(self.data, self.spec, self.config, n_jobs=1)
        pooled, _ = fit_graph(self.data, self.spec, self.config, n_jobs=2)
        np.testing.assert_array_equal(serial.inclusion, pooled.inclusion)
        self.assertEqual(len(fits), 3)
        self.assertTrue(np.all(np.isnan(serial.h_hat)))


if __name__ == '__main__':
    unittest.main()
