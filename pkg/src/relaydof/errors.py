"""Exception hierarchy.

Errors deriving from :class:`DegenerateDraw` mark probability-zero channel
events (singular systems, missing null spaces). Monte Carlo drivers catch
them and redraw the realization; everything else is a usage or assembly bug.
"""


class RelayDofError(Exception):
    """Base class for all package errors."""


class DegenerateDraw(RelayDofError):
    """A channel realization produced a numerically degenerate system."""


class Singular(DegenerateDraw):
    """Pivot below the relative tolerance during a linear solve."""


class EmptyNullSpace(DegenerateDraw):
    """The matrix has full column rank, so no null vector exists."""


class RankDeficient(DegenerateDraw):
    """An effective channel matrix lost rank."""


class BadBand(RelayDofError, ValueError):
    """Channel magnitude band with h_min >= h_max (or non-positive)."""


class HalfDuplexViolation(RelayDofError):
    """A node is scheduled to transmit and receive in the same slot."""


class SingularNoiseCov(RelayDofError):
    """Aggregate noise covariance is singular (noise-off report or assembly bug)."""


class ConfigError(RelayDofError, ValueError):
    """Incompatible scheme parameters."""
