"""Exception types shared across the toolkit.

The CLI maps ParameterError/FormatError to exit code 2 and NumericError
to exit code 3; everything else is a bug.
"""


class WdrcmError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(WdrcmError, ValueError):
    """A parameter is outside its documented domain."""


class DomainError(WdrcmError, ValueError):
    """Inputs are structurally invalid for the operation (e.g. identical vertices)."""


class IndexRangeError(WdrcmError, KeyError):
    """A required vertex index is missing from the configuration."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"configuration does not contain vertex index {index}")


class NumericError(WdrcmError, ArithmeticError):
    """A numerical routine failed to reach its required tolerance."""

    def __init__(self, message, achieved_tolerance=None):
        self.achieved_tolerance = achieved_tolerance
        super().__init__(message)


class FormatError(WdrcmError, ValueError):
    """Serialized data does not match the expected schema."""
