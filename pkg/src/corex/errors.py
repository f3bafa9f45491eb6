"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: data problems (parse, validation,
domain, degenerate input) exit 3; convergence failures and infeasible
rescaling exit 4.
"""


class CorexError(Exception):
    """Base class for all package errors."""


class ParseError(CorexError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ValidationError(CorexError):
    """Input violates a structural invariant (self-loop, asymmetry, ...)."""


class RangeError(ValidationError):
    """Node id outside the declared range."""


class DomainError(CorexError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateError(CorexError):
    """Data admits no meaningful answer (e.g. all scores identical)."""


class ConvergenceError(CorexError):
    """Iterative solver exhausted its budget; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(CorexError):
    """Requested rescaling cannot be met with valid probabilities."""
