"""
StockFlow · Error Types
Every failure raised by the simulation packages derives from StockFlowError.
The CLI maps them to exit codes (see cli/commands.py).
"""


class StockFlowError(Exception):
    """Base class for all StockFlow errors."""


class ValidationError(StockFlowError, ValueError):
    """Invalid input data or configuration. Carries every problem found."""

    def __init__(self, errors: list[str] | str):
        self.errors = [errors] if isinstance(errors, str) else list(errors)
        super().__init__("; ".join(self.errors))


class DomainError(StockFlowError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(StockFlowError, RuntimeError):
    """A root-finding loop ran out of iterations."""
