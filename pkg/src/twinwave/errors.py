"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems
exit with 2, numerical failures with 3 and I/O failures with 4.
"""


class TwinwaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TwinwaveError):
    """Invalid, missing or unknown configuration input."""


class NumericError(TwinwaveError):
    """A numerical contract was violated (divergence, empty data, ...)."""


class IntegrationError(NumericError):
    """Step-size precondition violated or non-finite state encountered."""


class EstimatorError(NumericError):
    """A statistical estimator received degenerate input."""
