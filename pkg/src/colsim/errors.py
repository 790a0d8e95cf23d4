"""Exception types raised across colsim."""


class ColsimError(Exception):
    """Base class for colsim errors."""


class InvalidConfig(ColsimError, ValueError):
    pass


class DomainError(ColsimError, ValueError):
    pass


class NotHermitian(ColsimError, ValueError):
    pass


class SingularMap(ColsimError, ArithmeticError):
    """A denominator of the intermediate-map formulas vanished."""


class NonInvertible(ColsimError, ArithmeticError):
    """The channel being divided out has a (near) zero Pauli-transfer eigenvalue."""


class NotFound(ColsimError, LookupError):
    pass


class UnknownCheckpoint(ColsimError, KeyError):
    pass


class InsufficientData(ColsimError, ValueError):
    pass


class QuadratureFailure(ColsimError, RuntimeError):
    pass


class TruncationWarning(UserWarning):
    """Two-jump truncation of the analytic weights is leaving its regime of validity."""
