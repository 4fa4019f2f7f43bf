"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class WrongOrientationError(PreconditionError):
    """A boundary-orientation precondition does not hold for the input."""


class BandBoundaryError(ValueError):
    """A level query landed exactly on a band boundary value."""


class VerificationFailure(RuntimeError):
    """A certified inequality or identity failed beyond tolerance."""


class InfeasibleError(RuntimeError):
    """No admissible candidate exists for a variational problem."""
