"""Exception hierarchy.

Every error raised by the library derives from :class:`ElasticaError`.  The
command-line front end maps :class:`ValidationError` subclasses to exit code 2
and :class:`ComputationError` subclasses to exit code 3.
"""


class ElasticaError(Exception):
    """Base class for all library errors."""


class ValidationError(ElasticaError, ValueError):
    """Malformed input: bad file contents, invalid parameters, broken invariants."""


class ComputationError(ElasticaError, ArithmeticError):
    """A well-formed input for which the requested quantity cannot be computed."""


class DegenerateCurve(ComputationError):
    """A curve has zero length, collapsed points or a zero-side point triple."""


class PointOnTrace(ComputationError):
    """A winding query was made for a point lying on (or too close to) the trace."""

    def __init__(self, point, distance, tol):
        self.point = tuple(float(c) for c in point)
        self.distance = float(distance)
        self.tol = float(tol)
        super().__init__(
            f"winding_index: point {self.point} is at distance {self.distance:.3g} "
            f"from the trace (tolerance {self.tol:.3g})"
        )


class OpenContour(ComputationError):
    """An isocontour leaves the grid, so it cannot be closed inside the domain."""

    def __init__(self, t, location=None):
        self.t = float(t)
        self.location = None if location is None else tuple(float(c) for c in location)
        where = "" if location is None else f" near {self.location}"
        super().__init__(f"extract_level_set: contour at t={self.t:.9g} exits the grid{where}")


class NoValidCandidate(ComputationError):
    """No candidate level family passed the membership test."""


class OffsetSingularity(ComputationError):
    """An offset distance violates the admissibility margin on 1 + delta*k."""

    def __init__(self, message, location=None):
        self.location = None if location is None else tuple(float(c) for c in location)
        if location is not None:
            message = f"{message} (worst sample at {self.location})"
        super().__init__(message)


class BridgeCrossing(ComputationError):
    """A ghost bridge segment crosses one of the boundary arcs."""
