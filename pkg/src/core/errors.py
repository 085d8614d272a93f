"""
Exception hierarchy for tben.

Every error carries the process exit code the CLI reports for it:
1 usage/config, 2 data, 3 partial failure.
"""


class TbenError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class ConfigError(TbenError):
    """Invalid flags, settings or configuration objects."""

    exit_code = 1


class SpecError(ConfigError):
    """A dataset specification violates its preconditions."""


class DataError(TbenError):
    """Invalid or missing data."""


class FormatError(DataError):
    """A TBNF file has a malformed header."""


class TruncationError(DataError):
    """A TBNF payload does not match its declared extents."""


class AxisError(DataError):
    """An operation was applied to axes the tensor does not have."""


class DimensionError(DataError):
    """Vector or matrix extents do not agree."""


class LabelError(DataError):
    """A label is out of range or inconsistent with the hierarchy."""


class TensorIOError(DataError):
    """Reading or writing a file failed at the operating-system level."""


class PartialFailure(TbenError):
    """A batch command finished but some items failed."""

    exit_code = 3
