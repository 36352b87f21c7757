"""Exception types shared across the package."""


class CBLabError(Exception):
    """Base class for all cblab errors."""


class DomainError(CBLabError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class ConfigurationError(CBLabError, ValueError):
    """Inconsistent or unstable numerical configuration (steps, grids, probabilities)."""


class NumericalError(CBLabError, RuntimeError):
    """A solver produced non-finite values; carries the failing layer index when known."""


class TermSheetError(CBLabError, ValueError):
    """A term-sheet file could not be parsed or violates contract invariants."""
