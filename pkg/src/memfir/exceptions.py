"""Exception hierarchy shared by all memfir modules."""


class MemfirError(Exception):
    """Base class for all errors raised by memfir."""


class InvalidSpecError(MemfirError, ValueError):
    """A filter or grid specification violates its constraints."""


class UnsupportedError(MemfirError, ValueError):
    """The request is valid but outside what the designer supports."""


class ParseError(MemfirError, ValueError):
    """An input file could not be parsed.

    ``line`` carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleError(MemfirError):
    """No feedback resistor places every tap inside the memristance range."""


class DeadZoneViolation(MemfirError):
    """Scaled input would exceed the memristor dead-zone voltage.

    ``required_a`` is the largest scaling gain that would respect the bound.
    """

    def __init__(self, message, required_a=None):
        self.required_a = required_a
        super().__init__(message)


class RateMismatchError(MemfirError, ValueError):
    """Dense signal rate is not an integer multiple of the sampling rate."""


class AnalysisError(MemfirError, ValueError):
    """Measurement preconditions (window length, alignment, grids) failed."""
