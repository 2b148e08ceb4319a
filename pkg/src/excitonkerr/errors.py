"""Exception types raised across the package."""


class ExcitonKerrError(Exception):
    """Base class for all package errors."""


class InvalidConfig(ExcitonKerrError, ValueError):
    """Truncation dimensions or physical parameters are out of range."""


class DimensionMismatch(ExcitonKerrError, ValueError):
    """Operator and state live on differently truncated spaces."""


class IndexOutOfRange(ExcitonKerrError, IndexError):
    """A Fock level at or above the truncation dimension was requested."""


class TruncationLeakage(ExcitonKerrError):
    """Probability mass in the discarded or top Fock levels exceeds the budget."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class NonphysicalState(ExcitonKerrError):
    """A propagated density matrix acquired a significantly negative eigenvalue."""


class ConfigError(ExcitonKerrError, ValueError):
    """Scenario configuration does not match the schema."""
