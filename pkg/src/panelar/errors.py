"""Exception hierarchy.

Every error raised by the package derives from :class:`PanelArError`. The
three intermediate classes map onto the CLI exit codes: configuration
problems, bad input data, and numerical degeneracies.
"""


class PanelArError(Exception):
    """Base class for all package errors."""


class ConfigError(PanelArError, ValueError):
    """Invalid parameters or configuration."""


class DataError(PanelArError, ValueError):
    """Input data that violates the model's assumptions."""


class NumericalError(PanelArError, ArithmeticError):
    """A computation hit a degenerate configuration."""


class InvalidRegime(ConfigError):
    pass


class DegenerateT(ConfigError):
    pass


class ConfigParse(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class InsufficientGrid(ConfigError):
    pass


class MissingParameters(ConfigError):
    pass


class WrongRegime(ConfigError):
    pass


class UnbalancedPanel(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonzeroInitial(DataError):
    pass


class MissingInnovations(DataError):
    pass


class RegimeMismatch(DataError):
    pass


class EmptySample(DataError):
    pass


class ZeroDenominator(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass


class ReplicationFailed(NumericalError):
    """A replication raised; carries the replication index."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"replication {index} failed: {cause}")
        self.index = index
        self.cause = cause


class IoFailure(PanelArError, OSError):
    pass
