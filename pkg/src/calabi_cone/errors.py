"""Exception hierarchy.

Every domain error derives from :class:`GeometryError`; the CLI reports the
class name verbatim and exits with status 2.
"""


class GeometryError(Exception):
    """Base class for all domain errors raised by the library."""

    @property
    def name(self) -> str:
        return type(self).__name__


# exactgeom
class ZeroVector(GeometryError, ValueError):
    pass


class DependentGenerators(GeometryError, ValueError):
    pass


class DegeneratePolygon(GeometryError, ValueError):
    pass


class UnboundedRegion(GeometryError, ValueError):
    pass


class EmptyRegion(GeometryError, ValueError):
    pass


class DegenerateHull(GeometryError, ValueError):
    pass


# fan
class NotFullDimensional(GeometryError, ValueError):
    pass


class NotStronglyConvex(GeometryError, ValueError):
    pass


class GeneratorOffHyperplane(GeometryError, ValueError):
    pass


class InconsistentSupportFunction(GeometryError, ValueError):
    pass


class MissingBoundaryRays(GeometryError, ValueError):
    pass


class InvalidFan(GeometryError, ValueError):
    pass


# resolve
class RayAlreadyPresent(GeometryError, ValueError):
    pass


class NotInSupport(GeometryError, ValueError):
    pass


class AmbiguousLocation(GeometryError, ValueError):
    pass


class NotGorenstein(GeometryError, ValueError):
    pass


class TerminalSingularity(GeometryError, ValueError):
    pass


class NotGorensteinGroup(GeometryError, ValueError):
    pass


class NonIsolated(GeometryError, ValueError):
    pass


class BadParameters(GeometryError, ValueError):
    pass


class UnsupportedDimension(GeometryError, ValueError):
    pass


# reeb
class BoundaryPoint(GeometryError, ValueError):
    pass


class NonConvergence(GeometryError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# links
class NotQuasiHomogeneous(GeometryError, ValueError):
    pass


class NotIsolatedSingularity(GeometryError, ValueError):
    pass


class UnresolvedResidual(GeometryError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BadResidue(GeometryError, ValueError):
    pass


class UnknownFamily(GeometryError, ValueError):
    pass
