"""Error kinds raised across the estimator, forgetting, excitation and scenario code."""


class NonSPDInput(ValueError):
    """A matrix that must be symmetric positive definite failed its decomposition."""


class DimensionMismatch(ValueError):
    """Regressor, measurement or state shapes do not agree."""


class ParameterOutOfRange(ValueError):
    """A forgetting or bound parameter lies outside its admissible range."""


class ScalarOnly(ValueError):
    """The operation is only defined for scalar measurements (p = 1)."""


class InsufficientData(ValueError):
    """Not enough regressors for the requested window."""


class IndexOutOfRange(IndexError):
    """A window start/length points outside the available regressors."""


class NumericalBreakdown(ArithmeticError):
    """A linear solve or factorization failed during an update."""


class SvdFailure(NumericalBreakdown):
    """The singular value decomposition did not converge."""


class ConfigError(ValueError):
    """Scenario configuration is invalid.

    Args:
        errors: field-level messages, each formatted as ``"field: message"``
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
