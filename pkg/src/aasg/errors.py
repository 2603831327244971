"""Exception hierarchy shared by all modules."""


class AasgError(Exception):
    """Base class for library errors."""


class DomainError(AasgError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InputError(AasgError, ValueError):
    """Malformed or inconsistent input (dimension mismatch, duplicates...)."""


class NotSPDError(AasgError, ArithmeticError):
    """Non-positive pivot met while factoring a matrix."""


class BreakdownError(AasgError, ArithmeticError):
    """Krylov iteration broke down (NaN/Inf or a vanishing scalar)."""

    def __init__(self, message: str, iteration: int = -1):
        super().__init__(message)
        self.iteration = iteration


class ConvergenceError(AasgError, RuntimeError):
    """Iterative solver stopped without meeting its tolerance."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DegenerateError(AasgError, ArithmeticError):
    """A normalization has a zero denominator (e.g. all variances vanish)."""


class BudgetError(AasgError, RuntimeError):
    """Requested system would exceed the configured memory budget."""

    def __init__(self, message: str, catalog_size: int):
        super().__init__(message)
        self.catalog_size = catalog_size


class MismatchError(AasgError, ValueError):
    """Two runs do not share grid or field parameters."""
