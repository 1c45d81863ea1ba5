"""
Unit tests for the custom error classes in the `src.assets.custom_errors` module.

This test suite validates the error messages and formats of the exceptions raised
by the selection engine and the experiment harness. Each class carries a tailored
message and a suggested action to help the user resolve the problem.

Key tests include:

- `TestEngineError`: Verifies the default and custom messages of the base class and
that every engine error inherits from it.

- `TestConfigValidationError`: Checks that the dotted field path and the value are
reported and exposed through the `field` property.

- `TestResponseDomainError`: Ensures the family and the offending response value
appear in the message.

- `TestSizeGuardError`: Validates the guarded quantity, the value and the limit.

- `TestSelectionRuleError`: Verifies that the largest available threshold is
reported and exposed.

- `TestConditionMappingError`: Checks the condition id and the sample size.

- `TestFamilyMismatchError`: Validates the expected/found family message.

The tests use Python's `unittest` framework.
"""

# Standard library imports
import unittest

# Local imports
from src.assets.custom_errors import (
    EngineError, ConfigValidationError, ResponseDomainError, DimensionError,
    UnsupportedFamilyError, SizeGuardError, SelectionRuleError, FamilyMismatchError,
    StandardizationError, FactorizationError, ConditionMappingError, ExperimentError
)


class TestEngineError(unittest.TestCase):
    """
    Test suite for the EngineError base class.
    """
    def test_default_message(self) -> None:
        """
        Test the default message for the EngineError exception.
        """
        error = EngineError()
        self.assertEqual(str(error),
                         "EngineError: An error occurred in the selection engine.\n"
                         " - Suggested action: Check the inputs and the logs.")

    def test_subclass_name_in_message(self) -> None:
        """
        Test that subclasses without their own format report their class name.
        """
        error = ExperimentError("Run aborted.")
        self.assertTrue(str(error).startswith("ExperimentError: Run aborted.\n"))

    def test_hierarchy(self) -> None:
        """
        Test that every engine error can be caught as EngineError.
        """
        errors = [
            ConfigValidationError("seed"), ResponseDomainError("poisson", -1.0), DimensionError(),
            UnsupportedFamilyError("logistic"), SizeGuardError("K", 30, 15), SelectionRuleError(0.4),
            FamilyMismatchError("probit", "logistic"), StandardizationError(2), FactorizationError(),
            ConditionMappingError("9", 100), ExperimentError(),
        ]
        for error in errors:
            self.assertIsInstance(error, EngineError)


class TestConfigValidationError(unittest.TestCase):
    """
    Test suite for the ConfigValidationError class.
    """
    def test_default_message(self) -> None:
        """
        Test that the field path and value are part of the message.
        """
        error = ConfigValidationError("prior.r_exp", 0)
        self.assertEqual(str(error),
                         "ConfigValidationError: Configuration validation failed.\n"
                         " - Field: prior.r_exp\n"
                         " - Value: 0\n"
                         " - Suggested action: Check the field value against the documented schema.")

    def test_field_property(self) -> None:
        """
        Test that the field path is exposed.
        """
        self.assertEqual(ConfigValidationError("mcmc.thin", -1).field, "mcmc.thin")


class TestResponseDomainError(unittest.TestCase):
    """
    Test suite for the ResponseDomainError class.
    """
    def test_default_message(self) -> None:
        """
        Test that the family and the offending value are reported.
        """
        error = ResponseDomainError("poisson", 1.5)
        self.assertEqual(str(error),
                         "ResponseDomainError: Response value outside the support of the poisson family.\n"
                         " - Family: poisson\n"
                         " - Value: 1.5\n"
                         " - Suggested action: Check that the response matches the family's support.")


class TestSizeGuardError(unittest.TestCase):
    """
    Test suite for the SizeGuardError class.
    """
    def test_default_message(self) -> None:
        """
        Test that the quantity, value and limit are reported.
        """
        error = SizeGuardError("K", 40, 15)
        self.assertEqual(str(error),
                         "SizeGuardError: K = 40 exceeds the guard limit 15.\n"
                         " - Quantity: K\n"
                         " - Limit: 15\n"
                         " - Suggested action: Reduce the problem size or use the MCMC sampler.")


class TestSelectionRuleError(unittest.TestCase):
    """
    Test suite for the SelectionRuleError class.
    """
    def test_max_threshold(self) -> None:
        """
        Test that the largest available threshold is exposed and reported.
        """
        error = SelectionRuleError(0.25)
        self.assertEqual(error.max_threshold, 0.25)
        self.assertIn(" - Max available threshold: 0.25", str(error))


class TestConditionMappingError(unittest.TestCase):
    """
    Test suite for the ConditionMappingError class.
    """
    def test_default_message(self) -> None:
        """
        Test that the condition id and the sample size are reported.
        """
        error = ConditionMappingError("12", 1000)
        self.assertEqual(str(error),
                         "ConditionMappingError: Rate mapping undefined.\n"
                         " - Condition: 12\n"
                         " - n: 1000\n"
                         " - Suggested action: Check the n-grid and the K/r/r_bar mappings.")


class TestFamilyMismatchError(unittest.TestCase):
    """
    Test suite for the FamilyMismatchError class.
    """
    def test_default_message(self) -> None:
        """
        Test the expected/found family message.
        """
        error = FamilyMismatchError("probit", "logistic")
        self.assertEqual(str(error),
                         "FamilyMismatchError: Family mismatch: expected probit, found logistic.\n"
                         " - Suggested action: Fit and evaluate with the same family.")


if __name__ == '__main__':
    unittest.main()
