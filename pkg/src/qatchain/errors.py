"""Exception hierarchy shared by every module."""


class QatError(Exception):
    """Base class for all package errors."""


class PhysicsError(QatError):
    """A numerical or physical precondition failed during a computation."""


class UnsupportedSpecError(QatError):
    """The requested system cannot be handled by the configured solvers."""


class UnsupportedOrderError(QatError):
    """Hermite order beyond what double precision supports."""


class CausticError(PhysicsError):
    """u2 vanishes (or is below the caustic threshold) at the requested time."""


class MapRangeError(PhysicsError):
    """A time or coordinate lies outside the image of the validity interval."""


class TruncationError(PhysicsError):
    """The grid does not hold the state: probability is lost at the edges."""


class AliasingError(PhysicsError):
    """The state is not band-limited on its grid."""


class BoundaryEscapeError(PhysicsError):
    """Probability density reached the edge of the oracle box."""


class OracleAccuracyError(PhysicsError):
    """Richardson self-check of the oracle integrator failed."""


class GridMismatchError(QatError):
    """Two states were combined on different grids."""


class PreconditionError(QatError):
    """An input violated a documented precondition (e.g. unnormalized state)."""


class NotApplicableError(QatError):
    """The diagnostic is not meaningful for this state (e.g. non-Gaussian)."""


class MagnitudeMismatchError(QatError):
    """|psi| is too far from the reference eigenstate for a phase residual."""


class SpecFileError(QatError):
    """Malformed or invalid RunSpec file."""
