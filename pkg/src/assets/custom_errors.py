class EngineError(Exception):
    """
    Base class for every error raised by the variable-selection engine.

    Attributes:
        _suggestion (str): Suggested action to resolve the error.
    """
    def __init__(self, message: str = "An error occurred in the selection engine.",
                 suggestion: str = "Check the inputs and the logs."):
        self._suggestion: str = suggestion
        Exception.__init__(self, message)

    def __str__(self) -> str:
        return (
            f"{type(self).__name__}: {self.args[0]}\n"
            f" - Suggested action: {self._suggestion}"
        )


class ConfigValidationError(EngineError):
    """
    Exception raised when an experiment configuration fails validation.

    Attributes:
        _field (str): Dotted path of the offending field (e.g. "prior.r_exp").
        _value (any): The invalid value provided.
        _suggestion (str): Suggested action to resolve the error.
    """
    def __init__(self, field: str, value: any = "Invalid value",
                 message: str = "Configuration validation failed.",
                 suggestion: str = "Check the field value against the documented schema."):
        self._field: str = field
        self._value: any = value
        EngineError.__init__(self, message, suggestion)

    @property
    def field(self) -> str:
        return self._field

    def __str__(self) -> str:
        return (
            f"ConfigValidationError: {self.args[0]}\n"
            f" - Field: {self._field}\n"
            f" - Value: {self._value}\n"
            f" - Suggested action: {self._suggestion}"
        )


class ResponseDomainError(EngineError):
    """
    Exception raised when a response value lies outside the support of a GLM family.

    Attributes:
        _family (str): Name of the family.
        _value (any): The offending response value.
    """
    def __init__(self, family: str, value: any,
                 suggestion: str = "Check that the response matches the family's support."):
        self._family: str = family
        self._value: any = value
        message = f"Response value outside the support of the {family} family."
        EngineError.__init__(self, message, suggestion)

    def __str__(self) -> str:
        return (
            f"ResponseDomainError: {self.args[0]}\n"
            f" - Family: {self._family}\n"
            f" - Value: {self._value}\n"
            f" - Suggested action: {self._suggestion}"
        )


class DimensionError(EngineError):
    """
    Exception raised when array shapes or model sizes are inconsistent.
    """
    def __init__(self, message: str = "Inconsistent dimensions.",
                 suggestion: str = "Check that coefficient vectors match the model indicator."):
        EngineError.__init__(self, message, suggestion)


class UnsupportedFamilyError(EngineError):
    """
    Exception raised when an operation is not available for a GLM family.

    Attributes:
        _family (str): Name of the family that was rejected.
    """
    def __init__(self, family: str, message: str = "Operation not supported for this family.",
                 suggestion: str = "Use a normal family or the generic (non-conjugate) routine."):
        self._family: str = family
        EngineError.__init__(self, message, suggestion)

    def __str__(self) -> str:
        return (
            f"UnsupportedFamilyError: {self.args[0]}\n"
            f" - Family: {self._family}\n"
            f" - Suggested action: {self._suggestion}"
        )


class SizeGuardError(EngineError):
    """
    Exception raised when a computation refuses a problem that exceeds its size guard.

    Attributes:
        _quantity (str): Name of the guarded quantity.
        _limit (int): Largest accepted value.
    """
    def __init__(self, quantity: str, value: int, limit: int,
                 suggestion: str = "Reduce the problem size or use the MCMC sampler."):
        self._quantity: str = quantity
        self._limit: int = limit
        message = f"{quantity} = {value} exceeds the guard limit {limit}."
        EngineError.__init__(self, message, suggestion)

    def __str__(self) -> str:
        return (
            f"SizeGuardError: {self.args[0]}\n"
            f" - Quantity: {self._quantity}\n"
            f" - Limit: {self._limit}\n"
            f" - Suggested action: {self._suggestion}"
        )


class SelectionRuleError(EngineError):
    """
    Exception raised when a selection rule retains no posterior draws.

    Attributes:
        _max_threshold (float): Largest inclusion probability available in the chain.
    """
    def __init__(self, max_threshold: float,
                 message: str = "The selection rule retained no posterior draws.",
                 suggestion: str = "Relax the rule (e.g. lower the inclusion threshold)."):
        self._max_threshold: float = max_threshold
        EngineError.__init__(self, message, suggestion)

    @property
    def max_threshold(self) -> float:
        return self._max_threshold

    def __str__(self) -> str:
        return (
            f"SelectionRuleError: {self.args[0]}\n"
            f" - Max available threshold: {self._max_threshold}\n"
            f" - Suggested action: {self._suggestion}"
        )


class FamilyMismatchError(EngineError):
    """
    Exception raised when two objects that must share a GLM family do not.
    """
    def __init__(self, expected: str, found: str,
                 suggestion: str = "Fit and evaluate with the same family."):
        message = f"Family mismatch: expected {expected}, found {found}."
        EngineError.__init__(self, message, suggestion)


class StandardizationError(EngineError):
    """
    Exception raised when a data column cannot be standardized.

    Attributes:
        _column (int): Index of the offending column.
    """
    def __init__(self, column: int, message: str = "Column has zero variance.",
                 suggestion: str = "Drop constant columns before neighborhood selection."):
        self._column: int = column
        EngineError.__init__(self, message, suggestion)

    def __str__(self) -> str:
        return (
            f"StandardizationError: {self.args[0]}\n"
            f" - Column: {self._column}\n"
            f" - Suggested action: {self._suggestion}"
        )


class FactorizationError(EngineError):
    """
    Exception raised when a matrix expected to be symmetric positive definite is not.
    """
    def __init__(self, message: str = "Matrix is not symmetric positive definite.",
                 suggestion: str = "Check the precision/covariance matrix."):
        EngineError.__init__(self, message, suggestion)


class ConditionMappingError(EngineError):
    """
    Exception raised when a rate mapping is undefined at some grid point.

    Attributes:
        _condition (str): The condition being evaluated.
        _n (int): The sample size where evaluation failed.
    """
    def __init__(self, condition: str, n: int, message: str = "Rate mapping undefined.",
                 suggestion: str = "Check the n-grid and the K/r/r_bar mappings."):
        self._condition: str = condition
        self._n: int = n
        EngineError.__init__(self, message, suggestion)

    def __str__(self) -> str:
        return (
            f"ConditionMappingError: {self.args[0]}\n"
            f" - Condition: {self._condition}\n"
            f" - n: {self._n}\n"
            f" - Suggested action: {self._suggestion}"
        )


class ExperimentError(EngineError):
    """
    Exception raised when an experiment run aborts.
    """
    def __init__(self, message: str = "The experiment run failed.",
                 suggestion: str = "Inspect the run manifest for the recorded failure."):
        EngineError.__init__(self, message, suggestion)
