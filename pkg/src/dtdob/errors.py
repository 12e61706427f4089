"""Exception types raised by the toolkit.

Every error that a numerical routine can signal deliberately (as opposed to
a programming mistake) derives from :class:`ToolkitError` so callers can
catch the whole family at once.
"""


class ToolkitError(Exception):
    """Base class for all deliberate toolkit errors."""


class ZeroPolynomial(ToolkitError):
    """An operation that needs a nonzero polynomial received the zero polynomial."""


class ConvergenceFailure(ToolkitError):
    """Root extraction did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateLeadingCoefficient(ToolkitError):
    """The leading coefficient interval of an interval polynomial straddles zero."""


class ImproperTransfer(ToolkitError):
    """A transfer function violated a properness requirement."""


class OutOfBounds(ToolkitError):
    """A coefficient assignment lies outside its interval bounds."""


class DegenerateSamplingPeriod(ToolkitError):
    """The sampling period hits an exceptional set (first Markov parameter vanishes)."""


class SingularSubstitution(ToolkitError):
    """A discretization substitution maps a pole/zero to infinity."""


class AmbiguousPairing(ToolkitError):
    """Zero classification could not uniquely pair discrete zeros with targets."""


class DegreeMismatch(ToolkitError):
    """An assembled polynomial does not have the expected degree."""


class MethodNotSchur(ToolkitError):
    """The discretization method's limiting numerator factor is not Schur."""


class SearchFailure(ToolkitError):
    """A gain search found no admissible stabilizing value."""


class CtDesignInvalid(ToolkitError):
    """The continuous-time Q-filter coefficients fail their own robustness condition."""


class AlgebraicLoop(ToolkitError):
    """A controller realization would require a delay-free feedback loop."""


class PreconditionViolation(ToolkitError):
    """Arguments fall outside the range where a predicate is meaningful."""


class PartitionFailure(ToolkitError):
    """Fast/slow assignment of characteristic roots is ambiguous."""


class ConfigError(ToolkitError):
    """A configuration file is malformed or inconsistent."""
