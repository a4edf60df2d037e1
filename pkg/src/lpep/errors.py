"""Exception hierarchy shared by the library and the CLI."""


class LpepError(Exception):
    """Base class for package errors."""


class DataError(LpepError, ValueError):
    """Malformed or unusable input data (bad CSV, rank deficiency, ...)."""


class NumericError(LpepError, ArithmeticError):
    """A factorization or iteration failed numerically."""


class ConfigError(LpepError, ValueError):
    """Inconsistent run configuration or an instance the method cannot handle."""


class FailureBudgetError(LpepError, RuntimeError):
    """Too many MCMC iterations hit numeric failures."""

    def __init__(self, failures, iterations):
        self.failures = failures
        self.iterations = iterations
        super().__init__(
            f"{failures} of {iterations} iterations failed numerically "
            f"(budget is 0.1%)"
        )
