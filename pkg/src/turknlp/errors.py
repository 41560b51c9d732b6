"""Exception types shared across the toolkit."""


class InputError(ValueError):
    """Raised when a runtime input violates an operation's preconditions."""


class ConfigError(ValueError):
    """Raised when a configuration value is inconsistent or out of range."""


class ParseError(ValueError):
    """Raised when a file or stream is malformed; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(ValueError):
    """Raised when well-formed data violates a task's constraints (bad tag, bad head index)."""


class ShapeError(ValueError):
    """Raised on inconsistent tensor shapes."""


class NumericError(ArithmeticError):
    """Raised when a computation produces a non-finite value where one is not allowed."""
