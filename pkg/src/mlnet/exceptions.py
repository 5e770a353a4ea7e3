"""Exception types raised across the package."""


class MLNetError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(MLNetError, ValueError):
    """Input cannot support the requested computation (e.g. K > n)."""


class DimensionMismatchError(MLNetError, ValueError):
    """Array shapes or label ranges disagree with each other."""


class DataFormatError(MLNetError, ValueError):
    """A data file could not be parsed."""


class NumericalFailureError(MLNetError, RuntimeError):
    """An iterative solver failed to converge or an invariant check failed.

    Attributes
    ----------
    diagnostics : dict
        Solver state at failure (iterations, residual norms, ...).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
