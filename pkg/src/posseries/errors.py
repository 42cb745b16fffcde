"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the command-line front end can map
failures to the documented process status without a lookup table.
"""


class SeriesError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class InvalidSpec(SeriesError, ValueError):
    pass


class DomainError(SeriesError, ValueError):
    pass


class NotApplicable(SeriesError, ValueError):
    pass


class PreconditionViolated(SeriesError, ValueError):
    pass


class MonotonicityViolated(PreconditionViolated):
    pass


class BoundViolated(PreconditionViolated):
    pass


class InvalidWeight(PreconditionViolated):
    pass


class ParseError(SeriesError, ValueError):
    """Raised by the expression parsers; ``offset`` points into the source text."""

    def __init__(self, message, text="", offset=0):
        self.text = text
        self.offset = offset
        if text:
            message = f"{message} at offset {offset}: {text!r}"
        super().__init__(message)


class ResourceGuard(SeriesError):
    """A size guard tripped before any heavy computation started."""

    exit_code = 3


class LimitExceeded(ResourceGuard):
    pass


class TableTooSmall(ResourceGuard):
    pass


class InputTooLarge(ResourceGuard):
    pass


class GuardExceeded(ResourceGuard):
    pass
