"""Exception hierarchy shared by the kernel, the geometry layers and the CLI."""


class CourantError(Exception):
    """Base class for every error raised by this package."""


class UnknownNameError(CourantError, NameError):
    """A coordinate, generator or scene object name that was never declared."""


class PoleError(CourantError, ZeroDivisionError):
    """Evaluation hit a zero denominator."""


class ExprSyntaxError(CourantError, ValueError):
    """Malformed expression text. ``column`` is 1-based within the expression."""

    def __init__(self, message, text="", column=None):
        self.text = text
        self.column = column
        where = f" at column {column}" if column is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)
        self.message = message


class SceneParseError(CourantError):
    """Scene document could not be parsed; carries a line/column location."""

    def __init__(self, message, line=None, column=None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        loc = ""
        if line is not None:
            loc = f"line {line}, column {column}: "
        if path:
            message = f"{message} (at {path})"
        super().__init__(loc + message)


class HypothesisError(CourantError):
    """A precondition of an operation does not hold for the supplied data."""


class CheckFailure(CourantError):
    """Raised by strict helpers when a verification fails."""
