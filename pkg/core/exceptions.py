"""
Exception hierarchy

All errors raised by the toolkit derive from DnlsError so that the command
line entry point can report them uniformly.
"""


class DnlsError(Exception):
    """Base class for toolkit errors"""


class BoundaryMass(DnlsError):
    """A position field has not decayed at the edge of the periodic box"""


class BandEdge(DnlsError):
    """A frequency field has not decayed at the edge of the dual band"""


class GridMismatch(DnlsError):
    """A field lives on a different grid than the plan applied to it"""


class DomainError(DnlsError):
    """An argument lies outside the mathematical domain of an operation"""


class OracleResolution(DnlsError):
    """The dense quadrature cannot resolve the kernel phase on this grid"""


class NonMonotoneTimes(DnlsError):
    """Snapshot times are not strictly increasing"""


class InsufficientRun(DnlsError):
    """A run is too short for the requested analysis"""


class NonPositiveValue(DnlsError):
    """A log-log fit received a value that is not strictly positive"""


class TooFewPoints(DnlsError):
    """A fit window holds fewer points than required"""


class PreconditionViolation(DnlsError):
    """An analysis precondition does not hold for the given input"""


class InvariantViolation(DnlsError):
    """A runtime invariant was violated during a run"""


class ConfigError(DnlsError):
    """Configuration failed validation"""
