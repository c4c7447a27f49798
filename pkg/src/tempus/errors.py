"""Exception types raised across the toolkit."""


class TempusError(Exception):
    """Base class for all toolkit errors."""


class InvalidParam(TempusError, ValueError):
    pass


class NonConvergent(TempusError, ArithmeticError):
    pass


class DomainError(TempusError, ValueError):
    pass


class SingularGamma(TempusError, ValueError):
    pass


class DegenerateSpectrum(TempusError, ValueError):
    pass


class QuadratureFailure(TempusError, ArithmeticError):
    pass


class NotHermitian(TempusError, ValueError):
    pass


class NoRootInRange(TempusError, ArithmeticError):
    pass


class AmbiguousRoot(TempusError, ArithmeticError):
    pass


class FormUnavailable(TempusError, ValueError):
    pass


class NormDrift(TempusError, ArithmeticError):
    pass
