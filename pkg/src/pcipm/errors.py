"""Exception types shared across the package."""


class PcipmError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(PcipmError, ValueError):
    """Cholesky factorization hit a non-positive pivot."""


class Singular(PcipmError, ValueError):
    """A symmetric indefinite (saddle) system is rank deficient."""


class DomainViolation(PcipmError, ValueError):
    """A point lies outside the barrier's perturbed domain."""


class MissingEqualitySystem(PcipmError, ValueError):
    pass


class StepCollapse(PcipmError, RuntimeError):
    """The integrator had to shrink its step below ``min_step``."""

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class MaxIterations(PcipmError, RuntimeError):
    pass


class InfeasibleAtTime(PcipmError, RuntimeError):
    """Phase I could not find a strictly feasible point."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonPositiveValue(PcipmError, ValueError):
    pass
