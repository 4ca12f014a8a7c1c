"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand lengths or shapes are incompatible."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(ValueError):
    """Requested size exceeds what dense exhaustive methods can handle."""


class EstimationError(ValueError):
    """An error-rate estimate was requested over an empty sample."""


class ReconciliationError(RuntimeError):
    """A reconciled word is inconsistent with the announced syndrome."""


class ConfigError(ValueError):
    """Invalid session or run configuration."""


class CodeSelectionError(RuntimeError):
    """No library code meets the decoding failure target.

    ``best_failure`` is the lowest estimated failure rate among the
    candidates that fit the block length (``None`` if none fit).
    """

    def __init__(self, message, best_failure=None):
        super().__init__(message)
        self.best_failure = best_failure
