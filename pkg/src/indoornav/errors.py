"""Exception hierarchy shared by all indoornav modules.

Every domain failure raises a subclass of :class:`IndoorNavError` so callers
(and the command line front end) can separate expected domain errors from
programming bugs.
"""


class IndoorNavError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(IndoorNavError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, line_number, reason):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class OrderError(IndoorNavError):
    """Timestamps in a stream are not strictly increasing."""


class FormatError(IndoorNavError):
    """Binary image data has a bad magic number, header, or payload size."""


class DegenerateGeometry(IndoorNavError):
    """Point sets too small or rank-deficient for rigid alignment."""


class DimensionMismatch(IndoorNavError):
    """Two images that must share dimensions do not."""


class InsufficientBackground(IndoorNavError):
    """Too few tracked points outside detection boxes to fit camera motion."""


class LengthMismatch(IndoorNavError):
    """Paired trajectories have different lengths."""


class DeltaTooLarge(IndoorNavError):
    """Relative-error frame interval is at least the trajectory length."""


class EmptySamples(IndoorNavError):
    """A summary statistic was requested for zero samples."""


class NoPath(IndoorNavError):
    """The goal cell is unreachable from the start cell."""


class InvalidEndpoint(IndoorNavError):
    """Start or goal cell is occupied or outside the grid."""


class InvalidThresholds(IndoorNavError):
    """Hysteresis thresholds are inverted (low above high)."""


class InvalidWorld(IndoorNavError):
    """Simulation start or goal lies inside an obstacle."""


class PlacementFailure(IndoorNavError):
    """Random scene generation could not satisfy clearance constraints."""
