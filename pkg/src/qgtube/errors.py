"""Exception hierarchy for qgtube.

All numerical-validity failures raise subclasses of :class:`QGTubeError`, so
callers (and the CLI) can distinguish bad inputs (exit 1) from tolerance
failures (exit 2) without string matching.
"""


class QGTubeError(Exception):
    """Base class for all qgtube errors."""


class ValidationError(QGTubeError):
    """Invalid input: bad parameters, malformed config, broken invariants."""


class AccuracyError(QGTubeError):
    """A computed quantity failed its accuracy/tolerance requirement."""


class DirichletPointError(QGTubeError):
    """The energy lies in (or numerically on) the Dirichlet spectrum of an edge."""

    def __init__(self, message, lam=None, edge=None):
        super().__init__(message)
        self.lam = lam
        self.edge = edge


class BandEdgeError(QGTubeError):
    """The energy sits at a band edge; the requested operation is unsupported there."""


class ClassificationError(QGTubeError):
    """A Floquet mode could not be classified (off-circle flux request, etc.)."""


class DegenerateStencilError(QGTubeError):
    """The column solve behind the propagator is singular; indicates a geometry bug."""


class InfeasibleError(QGTubeError):
    """A constructive procedure (e.g. Robin design) has no solution for the inputs."""


class ConsistencyError(QGTubeError):
    """An internal structural invariant failed (wrong segment/root counts, ...)."""


class ConvergenceError(QGTubeError):
    """An iterative solver did not converge within its iteration cap."""


class ResourceLimitError(QGTubeError):
    """A discretization request exceeds the configured size limits."""
