"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1 (usage),
DataError and subclasses -> 2, NumericError and subclasses -> 3.
"""


class CrisisLensError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CrisisLensError, ValueError):
    """Invalid configuration value (bad rate, negative count, unknown flag)."""


class DimensionError(CrisisLensError, ValueError):
    """Tensor shapes do not line up for the requested operation."""


class DataError(CrisisLensError, ValueError):
    """Malformed or inconsistent input data (corpus, graph, lexicon, labels)."""


class SchemaError(DataError):
    """A loaded record violates a documented invariant."""


class FormatError(DataError):
    """A serialized artifact is corrupt, truncated, or has the wrong version."""


class NumericError(CrisisLensError, ArithmeticError):
    """A computation produced a non-finite value."""


class TrainingError(NumericError):
    """Training diverged; message names the offending epoch."""
