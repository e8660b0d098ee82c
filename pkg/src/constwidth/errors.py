"""Error taxonomy shared by all modules.

Every exception carries a stable machine-readable ``code`` so the CLI can
print it on stderr without string matching on messages.
"""


class ConstWidthError(Exception):
    code = "error"


class MismatchedGeometry(ConstWidthError):
    code = "mismatched-geometry"


class NonUnitTangent(ConstWidthError):
    code = "non-unit-tangent"


class CoincidentPoints(ConstWidthError):
    code = "coincident-points"


class AntipodalPoints(ConstWidthError):
    code = "antipodal-points"


class DomainError(ConstWidthError):
    code = "domain-error"


class ProjectionPole(ConstWidthError):
    code = "projection-pole"


class ProjectionMismatch(ConstWidthError):
    code = "projection-mismatch"


class ConcentricCircles(ConstWidthError):
    code = "concentric-circles"


class EmptyBody(ConstWidthError):
    code = "empty-body"


class DifferentIdealPoints(ConstWidthError):
    code = "different-ideal-points"


class NestedViolation(ConstWidthError):
    code = "nested-violation"


class EmptyIntersection(ConstWidthError):
    code = "empty-intersection"


class DegenerateIntersection(ConstWidthError):
    code = "degenerate-intersection"


class DiameterExceeded(ConstWidthError):
    code = "diameter-exceeded"


class NonConvergence(ConstWidthError):
    code = "non-convergence"

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class CertificationFailure(ConstWidthError):
    code = "certification-failure"


class EndpointOffCircle(ConstWidthError):
    code = "endpoint-off-circle"


class DegenerateTriangle(ConstWidthError):
    code = "degenerate-triangle"


class EtaTooLarge(ConstWidthError):
    code = "eta-too-large"


class ValidationError(ConstWidthError):
    code = "validation-error"
