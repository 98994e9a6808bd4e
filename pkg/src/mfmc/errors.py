"""Exception hierarchy shared across the package.

Every error raised by the library derives from ``MFMCError`` so callers can
catch the whole family at once.  The CLI maps these onto exit codes (data
errors vs. numerical failures).
"""


class MFMCError(Exception):
    """Base class for all library errors."""


class ParameterDomainError(MFMCError, ValueError):
    """A parameter lies outside its admissible domain (sigma <= 0, p not in (0,1), ...)."""


class DataError(MFMCError, ValueError):
    """A dataset violates its contract (too few rows, bad weights, malformed file)."""


class DegenerateDataError(DataError):
    """Data carry no usable variation (constant sample where variance is required)."""


class ParseError(DataError):
    """A CSV row failed to parse; carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class DegenerateMomentsError(MFMCError, ValueError):
    """A moment map is not evaluable at the given moments (e.g. y2 - y1**2 <= 0)."""


class EstimationError(MFMCError, RuntimeError):
    """Numerical likelihood maximization failed to converge after restarts."""


class IntegrationError(MFMCError, RuntimeError):
    """Quadrature or Monte Carlo refinement failed to reach the agreement target."""


class SingularityError(MFMCError, RuntimeError):
    """A matrix that must be inverted is singular; carries a condition estimate."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number
