"""Exception types raised by the library."""


class LobresError(Exception):
    """Base class for all library errors."""


class EventParseError(LobresError, ValueError):
    """Malformed or out-of-order row in an event file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BookError(LobresError, ValueError):
    """An event cannot be applied to the current book."""


class SchemaError(LobresError, ValueError):
    """An artifact is missing a column/field or has the wrong type."""

    def __init__(self, message: str, column: str | None = None):
        self.column = column
        super().__init__(message)


class DistributionError(LobresError, ValueError):
    """Invalid distribution parameters, argument or undefined moment."""


class FitError(LobresError, ValueError):
    """A model cannot be fitted or used."""


class SelectionError(LobresError, ValueError):
    """Subset search request outside supported bounds."""
