"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific type that applies instead of bare ValueError/RuntimeError.
"""


class ValidationError(ValueError):
    """Invalid parameters, grids, or configuration values."""


class ConfigError(ValidationError):
    """Malformed or inconsistent run configuration."""


class GridMismatchError(ValidationError):
    """Sampled data does not live on the grid an operation requires."""


class TruncationError(ArithmeticError):
    """A mode series could not be truncated below the requested tail tolerance."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation failed to converge."""
