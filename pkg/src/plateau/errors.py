"""Exception hierarchy. Each failure class carries the CLI exit code it maps to."""


class PlateauError(Exception):
    exit_code = 3

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context


# -- input / parse ---------------------------------------------------------

class InvalidSpec(PlateauError):
    exit_code = 2


class ParseError(PlateauError):
    exit_code = 2


class MissingInput(PlateauError):
    exit_code = 2


# -- quadrature / geometry -------------------------------------------------

class NearBoundary(PlateauError):
    pass


class QuadratureFailure(PlateauError):
    pass


class ResolutionTooCoarse(PlateauError):
    pass


class SingularPoint(PlateauError):
    pass


class UseAlternative(PlateauError):
    pass


class OutOfRange(PlateauError):
    pass


class DegenerateParametrization(PlateauError):
    pass


class SingularPointOfCurve(PlateauError):
    pass


# -- reconstruction --------------------------------------------------------

class MomentViolation(PlateauError):
    exit_code = 1


class NonPositiveChain(PlateauError):
    exit_code = 4


class RootFailure(PlateauError):
    pass


class BoundaryMismatch(PlateauError):
    pass


class MassBoundViolation(PlateauError):
    pass


class OrientationInconsistency(PlateauError):
    pass


# -- extension -------------------------------------------------------------

class ObstructedExtension(PlateauError):
    exit_code = 5
