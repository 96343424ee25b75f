"""Exception hierarchy.

CLI exit codes are keyed off these classes: ConfigError -> 2,
DataError -> 3, ConsistencyError -> 4.
"""


class CohomGHError(Exception):
    exit_code = 1


class ConfigError(CohomGHError, ValueError):
    """Bad parameters or run configuration."""

    exit_code = 2


class DataError(CohomGHError, ValueError):
    """Input data cannot be processed."""

    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class DegeneracyError(DataError):
    """Input violates a general-position or non-duplication requirement."""

    def __init__(self, message, indices=None):
        self.indices = indices
        super().__init__(message)


class SizeError(DataError):
    pass


class UndefinedDistanceError(DataError):
    """u_GH requested against an empty space."""


class ConsistencyError(CohomGHError, ArithmeticError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 4


class ConvergenceError(ConsistencyError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
