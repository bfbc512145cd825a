"""Exception types shared across the package."""


class ItynessError(Exception):
    """Base class for all package errors."""


class InputError(ItynessError):
    """Malformed or contract-violating input. CLI exit status 1."""


class DegenerateScoreError(ItynessError):
    """All similarity mass underflowed to zero; no score can be assigned."""


class NoCoverageError(ItynessError):
    """No rule in the model matches the query."""


class UndefinedStatisticError(ItynessError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class GenerationError(ItynessError):
    """Pseudoword generation could not fill its quota."""

    def __init__(self, message, shortfall=None):
        super().__init__(message)
        self.shortfall = shortfall or {}
