"""Exception hierarchy shared across the package."""


class FemriskError(Exception):
    """Base class for all package errors."""


class DataError(FemriskError):
    """Invalid input data: bad CSV, invariant violation, missing column."""


class NumericalError(FemriskError):
    """Numerical failure: singular system, non-convergence, degenerate test."""
