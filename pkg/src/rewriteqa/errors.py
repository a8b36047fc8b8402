"""Exception types shared across the package."""


class RewriteQAError(Exception):
    """Base class for all package errors."""


class ParseError(RewriteQAError):
    """A resource file is malformed. Carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif path is not None:
            where += " "
        super().__init__(f"{where}{message}")


class UnknownSymbol(RewriteQAError):
    """A logical form references an entity or predicate the KB does not declare."""


class MalformedForm(RewriteQAError):
    """A logical form violates a structural invariant (arity, depth, count placement)."""


class MissingPair(RewriteQAError):
    """A template pair was requested that the template-pair database does not hold."""


class NoAnswer(RewriteQAError):
    """Every candidate rewriting of a question failed to parse."""
