"""Exception hierarchy. Each class maps onto one CLI exit code."""


class IledError(Exception):
    exit_code = 1


class ParseError(IledError):
    """Syntax error in a clause, mode or window file."""

    exit_code = 2

    def __init__(self, message, line=None, col=None, source=None):
        self.line, self.col, self.source = line, col, source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:{col}: " if col is not None else f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DataError(IledError):
    """Well-formed input that violates a semantic constraint."""

    exit_code = 2


class ModeError(IledError):
    """A clause or literal does not fit the mode declarations."""

    exit_code = 2


class UnsafeClauseError(IledError):
    exit_code = 2


class NoSolution(IledError):
    """The abductive task has no solution under the language bias."""

    exit_code = 3


class ResourceLimit(IledError):
    """A configured search or grounding cap was exceeded."""

    exit_code = 4

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
