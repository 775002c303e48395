"""Exception types raised by the geometry, integrator, and analysis layers."""


class NilsphereError(Exception):
    """Base class for all package-specific errors."""


class DomainError(NilsphereError):
    """Input outside the mathematical domain of an operation."""


class PoleProximity(DomainError):
    """Sphere polar chart evaluated within delta_pole of a coordinate pole.

    When raised while integrating, ``time`` carries the failure time.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NotHorizontal(DomainError):
    """Product cotangent state violates the horizontality constraint."""


class SingularProximity(DomainError):
    """Finite-difference stencil would cross a singular locus (pole or c = 0)."""


class NewtonDivergence(NilsphereError):
    """Implicit midpoint Newton iteration failed to converge."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class StepRejected(NilsphereError):
    """An integration step was rejected; carries the failure time."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NotOnRegularFiber(NilsphereError):
    """Trajectory is not confined to a single regular fibration fibre."""


class ConfigError(NilsphereError):
    """Invalid, unknown, or ill-typed configuration input."""
