"""
Unit tests for the utility functions in the `src.assets.utils` module.

This test suite ensures that seeding, version reporting and result writing behave
as the experiment harness expects.

Key tests include:

- `TestSeeding`: Verifies that identical (seed, replicate, role) inputs give identical
streams, that changing any of them gives a different stream, and that distinct
streams are uncorrelated.

- `TestPackageVersions`: Checks the reported package versions.

- `TestWriters`: Confirms the CSV format, JSON serialization of numpy values and the
error raised on unserializable payloads.

The tests use Python's `unittest` framework with temporary directories.
"""

# Standard library imports
import json
import os
import tempfile
import unittest

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from src import PACKAGE_NAME, __version__
from src.assets.custom_errors import ExperimentError
from src.assets.utils import (SeedRole, derive_seed, grid_role, package_versions, read_results,
                              seed_stream, write_csv, write_json)


class TestSeeding(unittest.TestCase):
    """
    Test suite for derive_seed and seed_stream.
    """
    def test_identical_inputs(self) -> None:
        """
        Test that the same inputs reproduce the same draws.
        """
        a = seed_stream(42, 3, SeedRole.MCMC).random(5)
        b = seed_stream(42, 3, "mcmc").random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_inputs(self) -> None:
        """
        Test that changing the seed, the replicate or the role changes the stream.
        """
        base = seed_stream(42, 3, SeedRole.DATA).random(5)
        for other in (seed_stream(43, 3, SeedRole.DATA), seed_stream(42, 4, SeedRole.DATA),
                      seed_stream(42, 3, SeedRole.HELLINGER), seed_stream(42, 3, grid_role(SeedRole.DATA, 100))):
            with self.subTest():
                self.assertFalse(np.array_equal(base, other.random(5)))

    def test_streams_uncorrelated(self) -> None:
        """
        Test that replicate and role streams have lag-0 correlation below 0.05 over 10^4 draws.
        """
        streams = [seed_stream(42, replicate, SeedRole.DATA) for replicate in range(5)]
        streams += [seed_stream(42, 0, role) for role in (SeedRole.MCMC, SeedRole.HELLINGER, SeedRole.BASELINE)]
        corr = np.corrcoef(np.array([stream.standard_normal(10_000) for stream in streams]))
        off_diagonal = corr[~np.eye(len(streams), dtype=bool)]
        self.assertLess(np.max(np.abs(off_diagonal)), 0.05)

    def test_seed_range(self) -> None:
        """
        Test that derived seeds stay unsigned 64-bit, even for the largest master seed.
        """
        for master in (0, 2 ** 64 - 1):
            with self.subTest(master=master):
                seed = derive_seed(master, 0, SeedRole.DATA)
                self.assertGreaterEqual(seed, 0)
                self.assertLess(seed, 2 ** 64)

    def test_grid_role(self) -> None:
        """
        Test the per-grid-point role name.
        """
        self.assertEqual(grid_role(SeedRole.MCMC, 400), "mcmc@400")


class TestPackageVersions(unittest.TestCase):
    """
    Test suite for package_versions.
    """
    def test_versions(self) -> None:
        """
        Test that this package and the numerical stack are reported.
        """
        versions = package_versions()
        self.assertEqual(versions[PACKAGE_NAME], __version__)
        for name in ("numpy", "pandas", "scipy", "joblib"):
            self.assertIn(name, versions)


class TestWriters(unittest.TestCase):
    """
    Test suite for write_csv, write_json and read_results.
    """
    def setUp(self) -> None:
        """
        Set up a temporary output directory.
        """
        self.tmp = tempfile.TemporaryDirectory()
        self.out_dir = os.path.join(self.tmp.name, "out")

    def tearDown(self) -> None:
        """
        Remove the temporary output directory.
        """
        self.tmp.cleanup()

    def test_write_csv(self) -> None:
        """
        Test Unix line endings, the float format and reading the table back.
        """
        frame = pd.DataFrame({"n": [100, 200], "value": [1.0 / 3.0, 0.25]})
        path = write_csv(frame, self.out_dir, "table.csv")
        with open(path, "rb") as file:
            content = file.read()
        self.assertNotIn(b"\r\n", content)
        self.assertIn(b"0.3333333333", content)
        pd.testing.assert_frame_equal(read_results(path), frame, check_exact=False, rtol=1e-9)

    def test_read_missing(self) -> None:
        """
        Test that a missing result file gives None.
        """
        self.assertIsNone(read_results(os.path.join(self.out_dir, "missing.csv")))

    def test_write_json(self) -> None:
        """
        Test that numpy scalars, arrays and enums are serialized.
        """
        payload = {"k": np.int64(3), "values": np.array([0.5, 1.5]), "role": SeedRole.GRAPH}
        path = write_json(payload, self.out_dir, "payload.json")
        with open(path, "r", encoding="utf-8") as file:
            self.assertEqual(json.load(file), {"k": 3, "values": [0.5, 1.5], "role": "graph"})

    def test_write_json_unserializable(self) -> None:
        """
        Test that an unserializable payload raises ExperimentError.
        """
        with self.assertRaises(ExperimentError):
            write_json({"bad": object()}, self.out_dir, "bad.json")


if __name__ == '__main__':
    unittest.main()
