"""Exception taxonomy shared across the package.

ConfigError maps to CLI exit code 2; every other SpsError maps to exit code 1.
"""


class SpsError(Exception):
    """Base class for all package errors."""


class ConfigError(SpsError):
    """Invalid configuration value (bad flag, out-of-range parameter)."""


class FormatError(SpsError):
    """Malformed .spsf byte stream (bad magic, truncation, unknown dtype)."""


class DataError(SpsError):
    """Well-formed container with invalid payload (NaN/Inf, bad distribution)."""


class SchemaError(SpsError):
    """Manifest or sidecar JSON violates its schema or cross-references."""


class ShapeError(SpsError):
    """Tensor rank or dimension mismatch."""


class StaleSubspaceError(SpsError):
    """Loaded subspace fingerprint does not match the expected source matrix."""


class EmptySequenceError(SpsError):
    """An operation that needs at least one element got none."""


class EmptySetError(SpsError):
    """Candidate set is empty."""


class DegenerateInputError(SpsError):
    """Input is degenerate for the requested statistic (e.g. all-zero states)."""


class CalibrationError(SpsError):
    """Threshold calibration got an empty or unusable ratio sample."""


class EvalError(SpsError):
    """Evaluation precondition violated (names the offending query)."""
