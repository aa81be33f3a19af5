"""Exception taxonomy shared by every module in the package.

All domain errors derive from :class:`MonopoleError` so callers can catch the
whole family with one clause.  Guard halts raised while an integration is in
flight carry the partial trajectory produced so far in ``partial``, which lets
the CLI flush whatever was computed before the halt.
"""

from __future__ import annotations


class MonopoleError(Exception):
    """Base class for all domain errors raised by this package."""


class GuardHalt(MonopoleError):
    """A state guard stopped evaluation.

    When raised from inside an integration loop, ``partial`` holds the
    trajectory accumulated up to the last accepted step (``None`` otherwise).
    """

    def __init__(self, message: str = "", partial=None):
        super().__init__(message)
        self.partial = partial


# ----------------------------------------------------------------------
# geometry construction
# ----------------------------------------------------------------------

class ZeroVector(MonopoleError):
    """A vector that must be nonzero has (numerically) zero norm."""


class DependentInput(MonopoleError):
    """Orthonormalization received linearly dependent vectors."""


class NoIntersection(MonopoleError):
    """An affine plane misses the unit sphere (offset norm >= 1)."""


class DegenerateApex(MonopoleError):
    """A flat cone (offset zero) has no well-defined axis for embedding."""


# ----------------------------------------------------------------------
# charts
# ----------------------------------------------------------------------

class ChartSingularity(GuardHalt):
    """A point lies on or within the guard band of a chart's excluded ray."""


class OutsideChart(MonopoleError):
    """A bundle point lies outside the requested trivialization chart."""


class NotOnCone(MonopoleError):
    """A point fails the cone membership test beyond tolerance."""


# ----------------------------------------------------------------------
# dynamics / analysis
# ----------------------------------------------------------------------

class CollidingState(MonopoleError):
    """Initial data describe a radial (colliding) trajectory."""


class CollidingTrajectory(MonopoleError):
    """Trajectory samples are radially degenerate; no plane fit exists."""


class PoorFit(MonopoleError):
    """Radial projections do not fit a 2-plane within tolerance."""


class ZeroAngularMomentum(MonopoleError):
    """The conserved vector vanishes; the cone direction is undefined."""


class DegenerateCharge(MonopoleError):
    """Zero charge vector: motion is force-free and no cone is singled out."""


# ----------------------------------------------------------------------
# integration
# ----------------------------------------------------------------------

class ApexReached(GuardHalt):
    """The radius fell below the apex guard band around the origin."""


class NonFiniteState(MonopoleError):
    """The integrator produced NaN or infinity."""


class StepUnderflow(MonopoleError):
    """Adaptive step control would need a step below the minimum allowed."""


# ----------------------------------------------------------------------
# I/O
# ----------------------------------------------------------------------

class ParseError(MonopoleError):
    """A trajectory file is malformed or truncated."""
