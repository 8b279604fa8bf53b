"""Exception hierarchy shared by every stage of the pipeline."""


class CascadeBridgeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CascadeBridgeError):
    """A malformed input record. ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.reason = message
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class EmptyInputError(CascadeBridgeError):
    pass


class InvariantError(CascadeBridgeError):
    """An internal consistency check failed. This is a bug, not bad input."""


class DomainError(CascadeBridgeError, ValueError):
    """A quantity was requested outside the domain where it is defined."""


class RankDeficientError(CascadeBridgeError, ValueError):
    def __init__(self, message: str, columns: list[str]):
        self.columns = list(columns)
        super().__init__(f"{message}: {', '.join(self.columns)}")
