"""
Unit tests for the `src.experiments.harness` module.

This test suite runs small experiments end to end into temporary directories and
checks the written tables, the run manifest and the failure path.

Key tests include:

- `TestSimulateDataset`: Checks the shapes and family of a simulated dataset.

- `TestRateSweepSlope`: Verifies the log-log slope on exact power laws and the
minimum grid size.

- `TestRunExperiment`: Runs every experiment type at reduced size, checks their
columns, the manifest, byte-identical reruns, the contrast between variable selection
and the full-model baseline, the decreasing graph error and the recorded failure.

The tests use Python's `unittest` framework, along with `tempfile` directories and
`unittest.mock` for the failure path.
"""

# Standard library imports
import filecmp
import json
import os
import tempfile
import unittest
from unittest import mock

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from src.assets.config import validate_config
from src.assets.custom_errors import ExperimentError, SizeGuardError
from src.experiments import harness
from src.experiments.harness import (AUDIT_COLUMNS, COUNTEREXAMPLE_COLUMNS, FIT_COLUMNS, GRAPH_COLUMNS,
                                     MANIFEST_FILE, RATE_SWEEP_COLUMNS, rate_sweep_slope, run_experiment,
                                     simulate_dataset)
from src.models.glm_core import FamilyKind, GlmFamily
from src.models.hellinger import TrueModel, UniformCube

COUNTEREXAMPLE_CONFIG = {
    "experiment": "counterexample", "seed": 1, "replicates": 2,
    "counterexample": {"n_grid": [100], "K_factor": 2, "posterior_draws": 10000},
}

AUDIT_CONFIG = {
    "experiment": "audit", "seed": 3,
    "family": {"name": "logistic"},
    "truth": {"beta": {"kind": "geometric", "scale": 1.0, "ratio": 0.3}},
    "rate": {
        "n_grid": [100, 1000, 10000, 100000],
        "K_of_n": {"kind": "power", "coef": 1.0, "exponent": 2.0},
        "r_of_n": {"kind": "log_power", "coef": 1.0, "exponent": 1.0},
        "rbar_of_n": {"kind": "log_power", "coef": 1.0, "exponent": 1.5},
        "eps_scale": 0.5,
    },
}

FIT_CONFIG = {
    "experiment": "fit", "seed": 7,
    "family": {"name": "normal_known_var", "dispersion": 1.0},
    "truth": {"beta": {"kind": "geometric", "scale": 2.0, "ratio": 0.5}},
    "data": {"n": 60, "K": 5},
    "prior": {"r_exp": 1, "r_max": 3},
    "mcmc": {"iterations": 600, "burn_in": 100, "thin": 5},
    "hellinger": {"x_draws": 200},
}

CONTRAST_CONFIG = {
    "experiment": "fit", "seed": 13,
    "family": {"name": "normal_known_var", "dispersion": 1.0},
    "truth": {"beta": {"kind": "geometric", "scale": 3.0, "ratio": 0.5}},
    "data": {"n": 100, "K": 200},
    "prior": {"r_exp": 3, "r_max": 10},
    "mcmc": {"iterations": 4000, "burn_in": 1000, "thin": 10},
    "hellinger": {"x_draws": 500},
}

RATE_SWEEP_CONFIG = {
    "experiment": "rate_sweep", "seed": 11,
    "family": {"name": "logistic"},
    "truth": {"beta": {"kind": "geometric", "scale": 2.0, "ratio": 0.5}},
    "prior": {"v_policy": {"kind": "identity", "c": 4.0}},
    "mcmc": {"iterations": 600, "burn_in": 100, "thin": 5},
    "hellinger": {"x_draws": 200},
    "rate": {
        "n_grid": [50, 100, 200, 400],
        "K_of_n": {"kind": "power", "coef": 1.0, "exponent": 1.0},
        "r_of_n": {"kind": "log_power", "coef": 1.0, "exponent": 1.0},
        "rbar_of_n": {"kind": "log_power", "coef": 1.0, "exponent": 2.0},
    },
}

GRAPH_CONFIG = {
    "experiment": "graph", "seed": 5, "replicates": 2,
    "prior": {"r_exp": 1, "r_max": 3, "dispersion": {"kappa": 1.0, "rate": 1.0}},
    "mcmc": {"iterations": 1500, "burn_in": 300, "thin": 5},
    "graph": {"J": 6, "rho": 0.5, "n_grid": [50, 400], "x_draws": 500},
}


class TestSimulateDataset(unittest.TestCase):
    """
    Test suite for simulate_dataset.
    """
    def test_shapes(self) -> None:
        """
        Test that n rows of K bounded covariates and binary responses are drawn.
        """
        truth = TrueModel(GlmFamily(FamilyKind.LOGISTIC), [1.0, 0.0, -1.0], UniformCube(3))
        data = simulate_dataset(truth, 40, np.random.default_rng(0))
        self.assertEqual(data.X.shape, (40, 3))
        self.assertTrue(set(np.unique(data.y)) <= {0.0, 1.0})
        self.assertEqual(data.family, truth.family)


class TestRateSweepSlope(unittest.TestCase):
    """
    Test suite for rate_sweep_slope.
    """
    def test_power_law(self) -> None:
        """
        Test that medians 2 n^-0.4 give slope -0.4 inside the default band.
        """
        grid = [100, 200, 400, 800]
        frame = pd.DataFrame({"n": np.repeat(grid, 2),
                              "median_hellinger": np.repeat([2.0 * n ** -0.4 for n in grid], 2)})
        result = rate_sweep_slope(frame, xi=0.5)
        self.assertAlmostEqual(result["slope"], -0.4, places=10)
        self.assertAlmostEqual(result["slope_se"], 0.0, places=10)
        self.assertAlmostEqual(result["target"], -0.25)
        self.assertTrue(result["in_band"])

    def test_outside_band(self) -> None:
        """
        Test that a flat sequence falls outside the band.
        """
        frame = pd.DataFrame({"n": [100, 200, 400, 800], "median_hellinger": [0.3] * 4})
        self.assertFalse(rate_sweep_slope(frame, xi=0.5)["in_band"])

    def test_too_few_points(self) -> None:
        """
        Test that three grid points give no slope.
        """
        frame = pd.DataFrame({"n": [100, 200, 400], "median_hellinger": [0.3, 0.2, 0.15]})
        result = rate_sweep_slope(frame, xi=0.5)
        self.assertIsNone(result["slope"])
        self.assertFalse(result["in_band"])


class TestRunExperiment(unittest.TestCase):
    """
    Test suite for run_experiment.
    """
    def setUp(self) -> None:
        """
        Set up a temporary output directory.
        """
        self.tmp = tempfile.TemporaryDirectory()
        self.out_dir = self.tmp.name

    def tearDown(self) -> None:
        """
        Remove the temporary output directory.
        """
        self.tmp.cleanup()

    def _manifest(self, out_dir: str) -> dict:
        with open(os.path.join(out_dir, MANIFEST_FILE), "r", encoding="utf-8") as file:
            return json.load(file)

    def test_counterexample(self) -> None:
        """
        Test the counterexample table, its hash column and the completed manifest.
        """
        config = validate_config(COUNTEREXAMPLE_CONFIG)
        result = run_experiment(config, self.out_dir)
        frame = pd.read_csv(result.outputs["counterexample"], dtype={"config_hash": str})
        self.assertEqual(list(frame.columns), COUNTEREXAMPLE_COLUMNS)
        self.assertEqual(len(frame), 2)
        self.assertTrue((frame["config_hash"] == config.hash).all())
        self.assertTrue(result.checks_passed)
        manifest = self._manifest(self.out_dir)
        self.assertEqual(manifest["status"], "completed")
        self.assertEqual(manifest["config_hash"], config.hash)
        self.assertIn("numpy", manifest["versions"])

    def test_rerun_is_identical(self) -> None:
        """
        Test that the same configuration writes byte-identical tables.
        """
        config = validate_config(COUNTEREXAMPLE_CONFIG)
        first = run_experiment(config, os.path.join(self.out_dir, "a"))
        second = run_experiment(config, os.path.join(self.out_dir, "b"))
        self.assertTrue(filecmp.cmp(first.outputs["counterexample"], second.outputs["counterexample"],
                                    shallow=False))

    def test_audit(self) -> None:
        """
        Test that the growing logistic audit passes and writes its tables.
        """
        result = run_experiment(validate_config(AUDIT_CONFIG), self.out_dir)
        frame = pd.read_csv(result.outputs["audit"], dtype={"condition": str, "config_hash": str})
        self.assertEqual(list(frame.columns), AUDIT_COLUMNS)
        self.assertIn("39", set(frame["condition"]))
        self.assertEqual(result.summary["failures"], [])
        self.assertTrue(result.checks_passed)
        self.assertTrue(os.path.exists(result.outputs["audit_summary"]))

    def test_fit(self) -> None:
        """
        Test the fit summary columns and one inclusion row per covariate.
        """
        result = run_experiment(validate_config(FIT_CONFIG), self.out_dir)
        summary = pd.read_csv(result.outputs["fit"])
        self.assertEqual(list(summary.columns), FIT_COLUMNS)
        self.assertEqual(int(summary.loc[0, "draws"]), 100)
        self.assertGreaterEqual(summary.loc[0, "median_hellinger"], 0.0)
        self.assertLessEqual(summary.loc[0, "median_hellinger"], np.sqrt(2.0))
        self.assertGreater(summary.loc[0, "baseline_median_hellinger"], 0.0)
        self.assertTrue(pd.isna(summary.loc[0, "contrast_pass"]))
        inclusion = pd.read_csv(result.outputs["inclusion"])
        self.assertEqual(len(inclusion), 5)
        self.assertTrue(inclusion["inclusion"].between(0.0, 1.0).all())

    def test_fit_contrast_with_full_model(self) -> None:
        """
        Test that variable selection beats the full-model baseline at n = 100, K = 200.
        """
        result = run_experiment(validate_config(CONTRAST_CONFIG), self.out_dir)
        summary = pd.read_csv(result.outputs["fit"])
        self.assertTrue(summary.loc[0, "contrast_pass"])
        self.assertLess(summary.loc[0, "median_hellinger"], 0.5 * summary.loc[0, "baseline_median_hellinger"])
        self.assertAlmostEqual(result.summary["baseline_median_hellinger"],
                               summary.loc[0, "baseline_median_hellinger"], places=6)

    def test_rate_sweep(self) -> None:
        """
        Test the rate sweep table and the slope summary on a short logistic grid.
        """
        result = run_experiment(validate_config(RATE_SWEEP_CONFIG), self.out_dir)
        frame = pd.read_csv(result.outputs["rate_sweep"], dtype={"config_hash": str})
        self.assertEqual(list(frame.columns), RATE_SWEEP_COLUMNS)
        self.assertEqual(list(frame["n"]), [50, 100, 200, 400])
        self.assertEqual(list(frame["K"]), [50, 100, 200, 400])
        self.assertTrue((frame["q10"] <= frame["median_hellinger"]).all())
        self.assertTrue((frame["median_hellinger"] <= frame["q90"]).all())
        self.assertEqual(result.summary["grid_points"], 4)
        self.assertIsInstance(result.summary["slope"], float)
        slope = pd.read_csv(result.outputs["slope"])
        self.assertIn("in_band", slope.columns)
        self.assertEqual(self._manifest(self.out_dir)["status"], "completed")

    def test_graph(self) -> None:
        """
        Test the node table, the graph artifacts and the decreasing median error over n.
        """
        result = run_experiment(validate_config(GRAPH_CONFIG), self.out_dir)
        frame = pd.read_csv(result.outputs["graph_nodes"], dtype={"config_hash": str})
        self.assertEqual(list(frame.columns), GRAPH_COLUMNS)
        self.assertEqual(len(frame), 6 * 2 * 2)
        for name in ("graph_n50_rep0", "graph_n50_rep1", "graph_n400_rep0", "graph_n400_rep1"):
            self.assertTrue(os.path.exists(result.outputs[name]))
        medians = result.summary["median_h_hat"]
        self.assertGreater(medians["50"], medians["400"])
        self.assertTrue(result.summary["decreasing"])
        self.assertTrue(result.checks_passed)

    def test_failure_is_recorded(self) -> None:
        """
        Test that an engine error becomes ExperimentError and a failed manifest.
        """
        def failing(*_):
            raise SizeGuardError("enumeration", 40, 15)

        config = validate_config(COUNTEREXAMPLE_CONFIG)
        with mock.patch.dict(harness._RUNNERS, {"counterexample": failing}):
            with self.assertRaises(ExperimentError):
                run_experiment(config, self.out_dir)
        manifest = self._manifest(self.out_dir)
        self.assertEqual(manifest["status"], "failed")
        self.assertIn("error", manifest)


if __name__ == '__main__':
    unittest.main()
