"""Exception hierarchy shared across the package.

ValidationError covers malformed or inadmissible inputs; NumericalError
covers failures arising during a computation (guard trips, points leaving
the profile domain, degenerate meshes).
"""


class QrotError(Exception):
    pass


class ValidationError(QrotError):
    pass


class NumericalError(QrotError):
    pass


class AdmissibilityError(ValidationError):
    """Profile violates r > 0 or |r'| < 1 on the check grid."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class OutsideDomainError(NumericalError):
    """A query point left the interval a function is defined on."""


class NotSpacelikeError(ValidationError):
    """A simplex of a discrete immersion has non-positive induced metric."""


class DegenerateStarError(NumericalError):
    """A vertex star spans fewer directions than the manifold dimension."""
