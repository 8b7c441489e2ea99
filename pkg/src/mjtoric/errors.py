"""Exception hierarchy shared by all subpackages."""


class MJToricError(Exception):
    """Base class for every error raised by mjtoric."""


# -- geometry ---------------------------------------------------------------

class GeometryError(MJToricError):
    pass


class InvalidPolytope(GeometryError):
    """Raised when an operation needs a valid Delzant polytope."""

    def __init__(self, message, cause=None):
        super().__init__(message)
        self.cause = cause


class UnboundedPolytope(GeometryError):
    pass


class NotFullDimensional(GeometryError):
    pass


class NonSimpleVertex(GeometryError):
    def __init__(self, message, vertex=None, facets=None):
        super().__init__(message)
        self.vertex = vertex
        self.facets = facets


class NonUnimodularVertex(GeometryError):
    def __init__(self, message, vertex=None, facets=None, det=None):
        super().__init__(message)
        self.vertex = vertex
        self.facets = facets
        self.det = det


class DegenerateFace(GeometryError):
    pass


class ChartFailure(GeometryError):
    pass


class FanMismatch(GeometryError):
    pass


class DegreeOverflow(GeometryError):
    pass


class InvalidFamilyMember(GeometryError):
    def __init__(self, message, knob=None):
        super().__init__(message)
        self.knob = knob


# -- matrix kernel ----------------------------------------------------------

class MatrixError(MJToricError):
    pass


class NonPositiveEigenvalue(MatrixError):
    pass


class NotPositiveDefinite(MatrixError):
    pass


class NotDiagonal(MatrixError):
    pass


class NotHermitian(MatrixError):
    pass


class HypothesisViolated(MatrixError):
    def __init__(self, message, which=None, index=None):
        super().__init__(message)
        self.which = which
        self.index = index


class SandwichViolated(MatrixError):
    pass


class DimensionTooLarge(MJToricError):
    pass


# -- solver -----------------------------------------------------------------

class SolverError(MJToricError):
    pass


class BoundaryOrExterior(SolverError):
    pass


class NewtonDiverged(SolverError):
    def __init__(self, message, node=None, location=None):
        super().__init__(message)
        self.node = node
        self.location = location


class ConvexityLost(SolverError):
    def __init__(self, message, node=None, location=None):
        super().__init__(message)
        self.node = node
        self.location = location


class NonConvergence(SolverError):
    pass


class InfeasibleTransport(SolverError):
    pass


class EndpointMismatch(SolverError):
    pass


class NotSeparable(SolverError):
    pass


# -- cli --------------------------------------------------------------------

class ParseError(MJToricError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownSuite(MJToricError):
    pass
