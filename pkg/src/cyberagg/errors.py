"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ValidationError -> 2, DataError -> 3,
NumericError -> 4.
"""


class CyberaggError(Exception):
    """Base class for all pipeline errors."""


class ValidationError(CyberaggError):
    """Bad configuration, incompatible options, or malformed arguments."""


class DataError(CyberaggError):
    """Unreadable or inconsistent input data."""


class NumericError(CyberaggError):
    """Non-finite values or failed numerical routines during training."""
